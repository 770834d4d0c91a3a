"""Procedural test surfaces and voxel solids."""

from __future__ import annotations

import math

import numpy as np

from .mesh import Mesh


def octahedron() -> Mesh:
    """Unit octahedron: vertices +x, -x, +y, -y, +z, -z (ids 0..5), outward faces."""
    pos = np.array(
        [[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1]], dtype=float
    )
    faces = [
        (0, 2, 4), (2, 1, 4), (1, 3, 4), (3, 0, 4),
        (2, 0, 5), (1, 2, 5), (3, 1, 5), (0, 3, 5),
    ]
    return Mesh(6, faces=faces, positions=pos)


def icosahedron() -> Mesh:
    t = (1 + math.sqrt(5)) / 2
    pos = np.array(
        [
            [-1, t, 0], [1, t, 0], [-1, -t, 0], [1, -t, 0],
            [0, -1, t], [0, 1, t], [0, -1, -t], [0, 1, -t],
            [t, 0, -1], [t, 0, 1], [-t, 0, -1], [-t, 0, 1],
        ],
        dtype=float,
    )
    pos /= np.linalg.norm(pos, axis=1, keepdims=True)
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    return Mesh(12, faces=faces, positions=pos)


def subdivide(mesh: Mesh, project: bool = False) -> Mesh:
    """Split every triangle into four at edge midpoints.

    New midpoint vertices are numbered after the originals in sorted edge
    order. With ``project`` all positions are pushed onto the unit sphere.
    """
    if mesh.faces is None or any(len(f) != 3 for f in mesh.faces):
        raise ValueError("subdivide needs a triangle mesh")
    mid = {e: mesh.n_vertices + i for i, e in enumerate(mesh.edges)}
    pos = np.vstack([mesh.positions, [(mesh.positions[a] + mesh.positions[b]) / 2 for a, b in mesh.edges]])
    if project:
        pos /= np.linalg.norm(pos, axis=1, keepdims=True)

    def m(a, b):
        return mid[(a, b) if a < b else (b, a)]

    faces = []
    for a, b, c in mesh.faces:
        ab, bc, ca = m(a, b), m(b, c), m(c, a)
        faces += [(a, ab, ca), (ab, b, bc), (ca, bc, c), (ab, bc, ca)]
    return Mesh(len(pos), faces=faces, positions=pos)


def octasphere(level: int = 2) -> Mesh:
    """Octahedron subdivided ``level`` times onto the unit sphere (level 2: 66 vertices)."""
    mesh = octahedron()
    for _ in range(level):
        mesh = subdivide(mesh, project=True)
    return mesh


def icosphere(level: int = 2) -> Mesh:
    mesh = icosahedron()
    for _ in range(level):
        mesh = subdivide(mesh, project=True)
    return mesh


def bumpy_sphere(level: int = 2, amplitude: float = 0.15, seed: int = 0) -> Mesh:
    """Icosphere with a smooth radial bump field; a closed genus-0 benchmark."""
    base = icosphere(level)
    rng = np.random.default_rng(seed)
    centers = rng.normal(size=(5, 3))
    centers /= np.linalg.norm(centers, axis=1, keepdims=True)
    p = base.positions
    r = 1 + amplitude * np.sum(np.exp(-4 * np.sum((p[:, None, :] - centers[None]) ** 2, axis=2)), axis=1)
    return Mesh(base.n_vertices, faces=base.faces, positions=p * r[:, None])


def uv_sphere(n_rings: int = 8, n_segments: int = 12) -> Mesh:
    """Latitude-longitude sphere.

    Vertex 0 is the north pole, then ``n_rings - 1`` rings of ``n_segments``
    vertices from north to south, then the south pole.
    """
    if n_rings < 2 or n_segments < 3:
        raise ValueError("need n_rings >= 2 and n_segments >= 3")
    pos = [(0.0, 0.0, 1.0)]
    for r in range(1, n_rings):
        th = math.pi * r / n_rings
        for s in range(n_segments):
            ph = 2 * math.pi * s / n_segments
            pos.append((math.sin(th) * math.cos(ph), math.sin(th) * math.sin(ph), math.cos(th)))
    pos.append((0.0, 0.0, -1.0))
    south = len(pos) - 1

    def ring(r, s):
        return 1 + (r - 1) * n_segments + s % n_segments

    faces = []
    for s in range(n_segments):
        faces.append((0, ring(1, s), ring(1, s + 1)))
    for r in range(1, n_rings - 1):
        for s in range(n_segments):
            a, b = ring(r, s), ring(r, s + 1)
            c, d = ring(r + 1, s), ring(r + 1, s + 1)
            faces += [(a, c, d), (a, d, b)]
    for s in range(n_segments):
        faces.append((ring(n_rings - 1, s), south, ring(n_rings - 1, s + 1)))
    return Mesh(len(pos), faces=faces, positions=np.array(pos))


def uv_ring(n_segments: int, r: int) -> list[int]:
    """Vertex ids of latitude ring ``r`` (1-based) of :func:`uv_sphere`."""
    return [1 + (r - 1) * n_segments + s for s in range(n_segments)]


def torus(n_major: int = 12, n_minor: int = 8, R: float = 2.0, r: float = 0.7) -> Mesh:
    """Triangulated torus (genus 1). Vertex ``i * n_minor + j`` sits at angles (i, j)."""
    pos = []
    for i in range(n_major):
        u = 2 * math.pi * i / n_major
        for j in range(n_minor):
            v = 2 * math.pi * j / n_minor
            pos.append(((R + r * math.cos(v)) * math.cos(u), (R + r * math.cos(v)) * math.sin(u), r * math.sin(v)))

    def vid(i, j):
        return (i % n_major) * n_minor + j % n_minor

    faces = []
    for i in range(n_major):
        for j in range(n_minor):
            a, b, c, d = vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1)
            faces += [(a, b, c), (a, c, d)]
    return Mesh(len(pos), faces=faces, positions=np.array(pos))


def grid_patch(nx: int, ny: int) -> Mesh:
    """Planar ``nx x ny`` vertex grid with quad faces (4-neighbor adjacency).

    Vertex ``x + nx * y`` sits at ``(x, y, 0)``.
    """
    pos = np.array([(x, y, 0.0) for y in range(ny) for x in range(nx)], dtype=float)
    faces = []
    for y in range(ny - 1):
        for x in range(nx - 1):
            a = x + nx * y
            faces.append((a, a + 1, a + 1 + nx, a + nx))
    return Mesh(nx * ny, faces=faces or None, positions=pos,
                edges=None if faces else [(i, i + 1) for i in range(nx * ny - 1)])


def grid_border(nx: int, ny: int) -> list[int]:
    return [x + nx * y for y in range(ny) for x in range(nx) if x in (0, nx - 1) or y in (0, ny - 1)]


def annulus(n: int = 8) -> Mesh:
    """Two concentric rings of ``n`` vertices joined by a strip of triangles."""
    pos = []
    for k, rad in ((0, 1.0), (1, 2.0)):
        for i in range(n):
            a = 2 * math.pi * i / n
            pos.append((rad * math.cos(a), rad * math.sin(a), 0.0))
    faces = []
    for i in range(n):
        a, b = i, (i + 1) % n
        faces += [(a, b, n + b), (a, n + b, n + a)]
    return Mesh(2 * n, faces=faces, positions=np.array(pos))


def box_occupancy(nx: int, ny: int, nz: int) -> np.ndarray:
    return np.ones((nx, ny, nz), dtype=bool)


def l_shape_occupancy(n: int = 8) -> np.ndarray:
    """An ``n x n x n`` block with one ``(n/2) x (n/2)`` column removed: non-convex."""
    occ = np.ones((n, n, n), dtype=bool)
    h = n // 2
    occ[h:, h:, :] = False
    return occ
