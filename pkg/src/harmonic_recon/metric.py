"""Graph distances and shortest paths on a mesh.

Two metrics are supported: hop counts (graph distance, the default) and
Euclidean edge lengths, which approximate surface geodesics by shortest
edge paths. Paths are made deterministic by always backtracking through the
lowest-index predecessor among equally short ones.
"""

from __future__ import annotations

import heapq
import logging
import math
from collections import deque
from enum import Enum
from typing import Callable, Iterable, Mapping

import numpy as np

from .errors import NoPathError, UnsupportedOperationError
from .mesh import Mesh, SampleSet

logger = logging.getLogger(__name__)

_REL_TOL = 1e-12


class DistanceMode(str, Enum):
    HOP = "hop"
    EUCLIDEAN = "euclidean_edge_weight"

    @classmethod
    def parse(cls, value) -> "DistanceMode":
        if isinstance(value, cls):
            return value
        aliases = {"hop": cls.HOP, "euclid": cls.EUCLIDEAN, "euclidean": cls.EUCLIDEAN}
        try:
            return aliases.get(value) or cls(value)
        except ValueError:
            raise ValueError(f"unknown distance mode {value!r}") from None


def edge_weight(mesh: Mesh, mode) -> Callable[[int, int], float] | None:
    """Weight function for ``mode``; ``None`` means unit weights."""
    mode = DistanceMode.parse(mode)
    if mode is DistanceMode.HOP:
        return None
    if mesh.positions is None:
        raise UnsupportedOperationError("euclidean_edge_weight mode needs vertex positions")
    pos = mesh.positions

    def w(u, v):
        return float(math.dist(pos[u], pos[v]))

    return w


def graph_distances(
    adj,
    n: int,
    sources: Mapping[int, float] | Iterable[int],
    weight: Callable[[int, int], float] | None = None,
    blocked: Iterable[int] = (),
    forbidden_edges: Iterable[tuple[int, int]] = (),
) -> np.ndarray:
    """Multi-source shortest distances over ``adj`` (vertices ``0 .. n-1``).

    ``sources`` maps vertex -> starting offset (a plain iterable means offset 0).
    Vertices in ``blocked`` are never entered and edges in ``forbidden_edges``
    are never crossed. Unreached vertices get ``inf``.
    """
    if not isinstance(sources, Mapping):
        sources = {s: 0.0 for s in sources}
    blocked = set(blocked)
    forbidden = {(min(e), max(e)) for e in forbidden_edges}
    dist = np.full(n, np.inf)
    for s, off in sources.items():
        dist[s] = min(dist[s], off)

    offsets = set(sources.values())
    if weight is None and offsets <= {0, 0.0}:
        queue = deque(sorted(sources))
        while queue:
            u = queue.popleft()
            du = dist[u] + 1
            for w in adj[u]:
                if dist[w] == np.inf and w not in blocked and (min(u, w), max(u, w)) not in forbidden:
                    dist[w] = du
                    queue.append(w)
        return dist

    heap = [(d, s) for s, d in ((s, dist[s]) for s in sources)]
    heapq.heapify(heap)
    done = np.zeros(n, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        for w in adj[u]:
            if done[w] or w in blocked or (min(u, w), max(u, w)) in forbidden:
                continue
            nd = d + (1.0 if weight is None else weight(u, w))
            if nd < dist[w]:
                dist[w] = nd
                heapq.heappush(heap, (nd, w))
    return dist


def _same(a: float, b: float) -> bool:
    return a == b or abs(a - b) <= _REL_TOL * max(abs(a), abs(b), 1.0)


def trace_path(
    adj,
    dist: np.ndarray,
    target: int,
    weight: Callable[[int, int], float] | None = None,
    blocked: Iterable[int] = (),
    forbidden_edges: Iterable[tuple[int, int]] = (),
    sources: Iterable[int] | None = None,
) -> list[int]:
    """Backtrack a shortest path ending at ``target`` from a distance array.

    At each step the lowest-index neighbor that lies on a shortest path is
    taken. The walk stops at a source (a vertex whose distance equals its
    starting offset, i.e. that has no shortest-path predecessor).
    """
    if not np.isfinite(dist[target]):
        raise NoPathError("source", target)
    blocked = set(blocked)
    forbidden = {(min(e), max(e)) for e in forbidden_edges}
    source_set = None if sources is None else set(sources)
    path = [target]
    u = target
    while True:
        if source_set is not None and u in source_set:
            break
        pred = None
        for w in adj[u]:  # ascending
            if w in blocked and (source_set is None or w not in source_set):
                continue
            if (min(u, w), max(u, w)) in forbidden or not np.isfinite(dist[w]):
                continue
            step = 1.0 if weight is None else weight(w, u)
            if dist[w] < dist[u] and _same(dist[w] + step, dist[u]):
                pred = w
                break
        if pred is None:
            break
        path.append(pred)
        u = pred
    path.reverse()
    return path


def shortest_distances(mesh: Mesh, source: int, mode="hop") -> np.ndarray:
    """Single-source distances from ``source``; ``inf`` marks unreachable vertices."""
    if not 0 <= source < mesh.n_vertices:
        raise ValueError(f"source {source} is not a mesh vertex")
    return graph_distances(mesh.adjacency, mesh.n_vertices, [source], edge_weight(mesh, mode))


def pairwise_sample_distances(mesh: Mesh, samples: SampleSet, mode="hop") -> np.ndarray:
    """Symmetric matrix of shortest distances between sample vertices.

    Rows and columns follow ``samples.vertices`` (ascending vertex id). One
    single-source search is run per sample.
    """
    verts = samples.vertices
    samples.check_against(mesh)
    k = len(verts)
    out = np.zeros((k, k))
    for i, v in enumerate(verts):
        d = shortest_distances(mesh, v, mode)
        out[i] = d[verts]
    # hop counts are exact; symmetrize to remove float round-off in weighted mode
    out = np.minimum(out, out.T)
    np.fill_diagonal(out, 0.0)
    if not np.isfinite(out).all():
        i, j = np.argwhere(~np.isfinite(out))[0]
        logger.warning("samples %d and %d are disconnected (infinite distance)", verts[i], verts[j])
    return out


def shortest_path(mesh: Mesh, u: int, v: int, mode="hop") -> list[int]:
    """Vertex sequence of a shortest ``u``-``v`` path (lowest-index tie-break)."""
    w = edge_weight(mesh, mode)
    dist = graph_distances(mesh.adjacency, mesh.n_vertices, [u], w)
    if not np.isfinite(dist[v]):
        raise NoPathError(u, v)
    return trace_path(mesh.adjacency, dist, v, w, sources=[u])


def path_length(mesh: Mesh, path, mode="hop") -> float:
    w = edge_weight(mesh, mode)
    if w is None:
        return float(len(path) - 1)
    return float(sum(w(a, b) for a, b in zip(path, path[1:])))
