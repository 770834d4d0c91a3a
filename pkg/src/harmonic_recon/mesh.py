"""Discrete domains: surface meshes, voxel volumes, samples and level chains."""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DisconnectedError,
    MeshParseError,
    NonManifoldError,
    ReconError,
    UnsupportedOperationError,
)

Adjacency = Mapping[int, Sequence[int]]


def graph_vertices(adj) -> Iterable[int]:
    """Vertex ids of an adjacency given as a mapping or an index-addressed list."""
    if isinstance(adj, Mapping):
        return adj.keys()
    return range(len(adj))


def is_connected(adj, vertices: Iterable[int] | None = None) -> bool:
    """Breadth-first connectivity test, optionally restricted to ``vertices``."""
    verts = set(graph_vertices(adj) if vertices is None else vertices)
    if not verts:
        return True
    start = min(verts)
    seen = {start}
    queue = deque([start])
    while queue:
        u = queue.popleft()
        for w in adj[u]:
            if w in verts and w not in seen:
                seen.add(w)
                queue.append(w)
    return len(seen) == len(verts)


def connected_components(adj, vertices: Iterable[int]) -> list[list[int]]:
    """Components of the subgraph induced by ``vertices``.

    Components are discovered from the lowest unvisited vertex upward, and each
    is returned sorted, so the output is deterministic.
    """
    verts = set(vertices)
    seen: set[int] = set()
    comps = []
    for s in sorted(verts):
        if s in seen:
            continue
        seen.add(s)
        comp = [s]
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for w in adj[u]:
                if w in verts and w not in seen:
                    seen.add(w)
                    comp.append(w)
                    queue.append(w)
        comps.append(sorted(comp))
    return comps


class Mesh:
    """Surface graph G = (D, E) with optional faces and vertex positions.

    Vertices are the integers ``0 .. n_vertices - 1``. Edges are stored as
    sorted pairs; when faces are given, every face edge is added to the edge
    set and each edge may border at most two faces.

    Instances are treated as immutable once built.
    """

    def __init__(
        self,
        n_vertices: int,
        edges: Iterable[tuple[int, int]] | None = None,
        faces: Sequence[Sequence[int]] | None = None,
        positions: np.ndarray | None = None,
    ):
        if n_vertices < 0:
            raise ValueError("n_vertices must be non-negative")
        self.n_vertices = int(n_vertices)
        if positions is not None:
            positions = np.asarray(positions, dtype=float)
            if positions.shape != (self.n_vertices, 3):
                raise ValueError(
                    f"positions must have shape ({self.n_vertices}, 3), got {positions.shape}"
                )
            positions.setflags(write=False)
        self.positions = positions

        edge_set: set[tuple[int, int]] = set()
        if edges is not None:
            for u, v in edges:
                e = self._checked_edge(int(u), int(v))
                if e in edge_set:
                    raise ValueError(f"duplicate edge {e}")
                edge_set.add(e)

        self.faces: tuple[tuple[int, ...], ...] | None = None
        if faces is not None:
            face_count: dict[tuple[int, int], int] = {}
            checked = []
            for fi, face in enumerate(faces):
                face = tuple(int(v) for v in face)
                if len(face) < 3:
                    raise ValueError(f"face {fi} has fewer than 3 vertices")
                if len(set(face)) != len(face):
                    raise ValueError(f"face {fi} repeats a vertex: {face}")
                for v in face:
                    if not 0 <= v < self.n_vertices:
                        raise ValueError(f"face {fi} references missing vertex {v}")
                for a, b in zip(face, face[1:] + face[:1]):
                    e = (a, b) if a < b else (b, a)
                    face_count[e] = face_count.get(e, 0) + 1
                    edge_set.add(e)
                checked.append(face)
            for e, c in face_count.items():
                if c > 2:
                    raise NonManifoldError(e, c)
            self.faces = tuple(checked)
            self._face_count = face_count

        self.edges: tuple[tuple[int, int], ...] = tuple(sorted(edge_set))
        nbrs: list[list[int]] = [[] for _ in range(self.n_vertices)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        self.adjacency: tuple[tuple[int, ...], ...] = tuple(tuple(sorted(n)) for n in nbrs)

    def _checked_edge(self, u, v):
        if not (0 <= u < self.n_vertices and 0 <= v < self.n_vertices):
            raise ValueError(f"edge ({u}, {v}) references a missing vertex")
        if u == v:
            raise ValueError(f"self-loop at vertex {u}")
        return (u, v) if u < v else (v, u)

    def __repr__(self):
        nf = "no" if self.faces is None else len(self.faces)
        return f"Mesh(V={self.n_vertices}, E={len(self.edges)}, F={nf})"

    @property
    def has_faces(self) -> bool:
        return self.faces is not None

    @property
    def has_positions(self) -> bool:
        return self.positions is not None

    def degree(self, v: int) -> int:
        return len(self.adjacency[v])

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def is_connected(self) -> bool:
        return is_connected(self.adjacency)

    def is_closed(self) -> bool:
        """True if faces are present and every edge borders exactly two faces."""
        if self.faces is None:
            return False
        return all(self._face_count.get(e, 0) == 2 for e in self.edges)

    def euler_characteristic(self) -> int:
        return euler_characteristic(self, range(self.n_vertices))

    def genus(self) -> int:
        """Genus of a closed connected orientable surface, from V - E + F = 2 - 2g."""
        if not self.is_closed():
            raise UnsupportedOperationError("genus is defined only for closed meshes")
        chi = self.euler_characteristic()
        if chi > 2 or (2 - chi) % 2:
            raise ReconError(f"Euler characteristic {chi} is not that of an orientable closed surface")
        return (2 - chi) // 2

    def subgraph(self, vertices: Iterable[int]) -> dict[int, list[int]]:
        """Induced subgraph as a vertex -> sorted neighbor list mapping."""
        vs = set(vertices)
        return {v: [w for w in self.adjacency[v] if w in vs] for v in sorted(vs)}

    def edge_length(self, u: int, v: int) -> float:
        if self.positions is None:
            raise UnsupportedOperationError("edge lengths need vertex positions")
        return float(np.linalg.norm(self.positions[u] - self.positions[v]))


def euler_characteristic(mesh: Mesh, subset: Iterable[int]) -> int:
    """V - E + F of the full subcomplex spanned by ``subset``.

    The subcomplex holds every vertex of ``subset``, every mesh edge with both
    endpoints in it, and every face with all of its vertices in it. For a
    connected vertex set on a closed surface this equals the Euler
    characteristic of the open region those vertices occupy once the rest of
    the mesh is removed, so 1 means a disk.
    """
    if mesh.faces is None:
        raise UnsupportedOperationError("Euler characteristic needs faces")
    s = set(subset)
    V = len(s)
    E = sum(1 for u, v in mesh.edges if u in s and v in s)
    F = sum(1 for f in mesh.faces if all(v in s for v in f))
    return V - E + F


class AdjacencyMode(str, Enum):
    SIX = "six"
    TWENTY_SIX = "twenty_six"


_FACE_OFFSETS = ((1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (0, 0, 1), (0, 0, -1))
_ALL_OFFSETS = tuple(
    o for o in itertools.product((-1, 0, 1), repeat=3) if o != (0, 0, 0)
)


class VolumeGrid:
    """Voxelized solid M on an ``nx x ny x nz`` lattice.

    Cells are addressed by flat index ``x + nx * (y + ny * z)`` (x fastest).
    A cell is on the boundary when it is occupied and at least one of its six
    face neighbors is unoccupied or outside the lattice; the remaining
    occupied cells are interior.
    """

    def __init__(self, occupancy, adjacency_mode: AdjacencyMode | str = AdjacencyMode.SIX):
        occ = np.asarray(occupancy, dtype=bool)
        if occ.ndim != 3 or min(occ.shape) < 1:
            raise ValueError("occupancy must be a non-empty 3D array")
        if not occ.any():
            raise ValueError("volume has no occupied cells")
        occ = occ.copy()
        occ.setflags(write=False)
        self.occupancy = occ
        self.dims: tuple[int, int, int] = tuple(int(d) for d in occ.shape)
        self.adjacency_mode = AdjacencyMode(adjacency_mode)

        padded = np.pad(occ, 1, constant_values=False)
        full = np.ones_like(occ)
        for dx, dy, dz in _FACE_OFFSETS:
            full &= padded[
                1 + dx : 1 + dx + occ.shape[0],
                1 + dy : 1 + dy + occ.shape[1],
                1 + dz : 1 + dz + occ.shape[2],
            ]
        interior = occ & full
        boundary = occ & ~interior
        self._interior_mask = interior
        self._boundary_mask = boundary
        self.boundary_cells: tuple[int, ...] = tuple(int(i) for i in np.flatnonzero(boundary.ravel(order="F")))
        self.interior_cells: tuple[int, ...] = tuple(int(i) for i in np.flatnonzero(interior.ravel(order="F")))

    def __repr__(self):
        return (
            f"VolumeGrid(dims={self.dims}, occupied={self.n_occupied}, "
            f"boundary={len(self.boundary_cells)}, interior={len(self.interior_cells)}, "
            f"mode={self.adjacency_mode.value})"
        )

    @property
    def n_cells(self) -> int:
        return self.dims[0] * self.dims[1] * self.dims[2]

    @property
    def n_occupied(self) -> int:
        return int(self.occupancy.sum())

    def with_mode(self, mode) -> "VolumeGrid":
        return VolumeGrid(self.occupancy, mode)

    def flat_index(self, x: int, y: int, z: int) -> int:
        nx, ny, _ = self.dims
        return x + nx * (y + ny * z)

    def coords(self, cell: int) -> tuple[int, int, int]:
        nx, ny, _ = self.dims
        return cell % nx, (cell // nx) % ny, cell // (nx * ny)

    def is_occupied(self, cell: int) -> bool:
        return bool(self.occupancy[self.coords(cell)])

    def is_boundary(self, cell: int) -> bool:
        return bool(self._boundary_mask[self.coords(cell)])

    def is_interior(self, cell: int) -> bool:
        return bool(self._interior_mask[self.coords(cell)])

    def neighbors(self, cell: int) -> list[int]:
        """Occupied neighbors of ``cell`` under the grid's adjacency mode, ascending."""
        offsets = _FACE_OFFSETS if self.adjacency_mode is AdjacencyMode.SIX else _ALL_OFFSETS
        x, y, z = self.coords(cell)
        nx, ny, nz = self.dims
        out = []
        for dx, dy, dz in offsets:
            a, b, c = x + dx, y + dy, z + dz
            if 0 <= a < nx and 0 <= b < ny and 0 <= c < nz and self.occupancy[a, b, c]:
                out.append(a + nx * (b + ny * c))
        out.sort()
        return out

    def surface_mesh(self) -> tuple[Mesh, list[int]]:
        """Boundary cells as a faceless surface graph (the cubical form of D).

        Returns the mesh and ``cells`` where mesh vertex ``i`` is boundary cell
        ``cells[i]``. Two boundary cells are joined when they are neighbors
        under the grid's adjacency mode. Positions are cell coordinates.
        """
        cells = list(self.boundary_cells)
        local = {c: i for i, c in enumerate(cells)}
        edges = set()
        for c in cells:
            for w in self.neighbors(c):
                j = local.get(w)
                if j is not None and j != local[c]:
                    i = local[c]
                    edges.add((i, j) if i < j else (j, i))
        pos = np.array([self.coords(c) for c in cells], dtype=float).reshape(-1, 3)
        return Mesh(len(cells), edges=sorted(edges), positions=pos), cells


class SampleSet:
    """Guiding points J: vertex id -> finite real value."""

    def __init__(self, entries: Mapping[int, float], n_vertices: int | None = None):
        if not entries:
            raise ValueError("sample set is empty")
        clean = {}
        for v, val in entries.items():
            v = int(v)
            val = float(val)
            if not math.isfinite(val):
                raise ValueError(f"sample at vertex {v} is not finite: {val}")
            if n_vertices is not None and not 0 <= v < n_vertices:
                raise ValueError(f"sample vertex {v} is not in the mesh (V={n_vertices})")
            clean[v] = val
        self.entries: dict[int, float] = dict(sorted(clean.items()))

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __getitem__(self, v):
        return self.entries[v]

    def __contains__(self, v):
        return v in self.entries

    def __repr__(self):
        return f"SampleSet({len(self)} samples)"

    @property
    def vertices(self) -> list[int]:
        """Sample vertices in ascending order; matrix rows follow this order."""
        return list(self.entries)

    @property
    def values(self) -> np.ndarray:
        return np.fromiter(self.entries.values(), dtype=float, count=len(self.entries))

    def check_against(self, mesh: Mesh) -> None:
        for v in self.entries:
            if not 0 <= v < mesh.n_vertices:
                raise ValueError(f"sample vertex {v} is not in the mesh (V={mesh.n_vertices})")


@dataclass(frozen=True)
class LevelSequence:
    """Strictly increasing level chain A_1 < ... < A_n."""

    levels: tuple[float, ...]
    spacing: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "levels", tuple(float(a) for a in self.levels))
        if not self.levels:
            raise ValueError("level sequence needs at least one level")
        if any(b <= a for a, b in zip(self.levels, self.levels[1:])):
            raise ValueError("levels must be strictly increasing")
        if not self.spacing > 0:
            raise ValueError("spacing must be positive")

    @classmethod
    def uniform(cls, start: float, spacing: float, n: int) -> "LevelSequence":
        return cls(tuple(start + k * spacing for k in range(n)), spacing)

    @property
    def n(self) -> int:
        return len(self.levels)

    def value(self, index: int) -> float:
        """Real value of a 1-based level index."""
        if not 1 <= index <= self.n:
            raise IndexError(f"level index {index} outside 1..{self.n}")
        return self.levels[index - 1]


@dataclass
class LevelField:
    """Vertex -> 1-based level index."""

    assignment: dict[int, int]

    def violations(self, adj) -> list[tuple[int, int]]:
        """Edges whose two endpoints are both assigned and differ by more than one level."""
        out = []
        a = self.assignment
        for u in a:
            for w in adj[u]:
                if u < w and w in a and abs(a[u] - a[w]) > 1:
                    out.append((u, w))
        return out

    def is_gradually_varied(self, adj) -> bool:
        return not self.violations(adj)


@dataclass
class ScalarField:
    """Real values over a declared domain (surface vertices, curve vertices, or volume cells)."""

    values: dict[int, float]
    domain: str = "surface"

    def __post_init__(self):
        for k, v in self.values.items():
            if not math.isfinite(v):
                raise ValueError(f"non-finite value at {k}")

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        return self.values[k]

    def __contains__(self, k):
        return k in self.values

    def as_array(self, keys: Sequence[int]) -> np.ndarray:
        return np.array([self.values[k] for k in keys], dtype=float)

    def restrict(self, keys: Iterable[int]) -> "ScalarField":
        return ScalarField({k: self.values[k] for k in keys}, self.domain)


def require_connected(mesh: Mesh) -> None:
    if not mesh.is_connected():
        raise DisconnectedError(f"mesh graph is not connected ({mesh!r})")


__all__ = [
    "AdjacencyMode",
    "LevelField",
    "LevelSequence",
    "Mesh",
    "MeshParseError",
    "SampleSet",
    "ScalarField",
    "VolumeGrid",
    "connected_components",
    "euler_characteristic",
    "graph_vertices",
    "is_connected",
    "require_connected",
]
