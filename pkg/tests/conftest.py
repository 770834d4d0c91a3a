"""Shared oracles and problem generators.

The oracles here deliberately avoid the package's own algorithms: distances
come from networkx, feasibility from exhaustive enumeration, harmonic
solutions from a dense matrix built straight from the adjacency.
"""

import itertools
from pathlib import Path

import networkx as nx
import numpy as np
import pytest

from harmonic_recon.harmonic import DirichletProblem
from harmonic_recon.shapes import grid_border, grid_patch, octasphere, torus

FIXTURES = Path(__file__).resolve().parents[1] / "fixtures"


@pytest.fixture
def fixtures_dir():
    return FIXTURES


def adjacency_of(g: nx.Graph) -> dict[int, list[int]]:
    return {int(v): sorted(int(w) for w in g[v]) for v in g.nodes}


def random_connected_graph(rng, n, p=0.4) -> nx.Graph:
    # random spanning tree plus extra edges keeps every draw connected
    g = nx.Graph()
    g.add_nodes_from(range(n))
    order = rng.permutation(n)
    for k in range(1, n):
        g.add_edge(int(order[k]), int(order[rng.integers(k)]))
    for u, v in itertools.combinations(range(n), 2):
        if rng.random() < p:
            g.add_edge(u, v)
    return g


def brute_force_extensions(adj, fixed: dict[int, int], n_levels: int):
    """Every level assignment in 1..n_levels that agrees with ``fixed`` and varies gradually.

    Returns an array of shape (count, n_vertices) over sorted vertex ids.
    """
    verts = sorted(adj)
    pos = {v: i for i, v in enumerate(verts)}
    free = [v for v in verts if v not in fixed]
    combos = list(itertools.product(range(1, n_levels + 1), repeat=len(free)))
    grid = np.array(combos, dtype=int).reshape(len(combos), len(free))
    full = np.empty((len(grid), len(verts)), dtype=int)
    for v, lev in fixed.items():
        full[:, pos[v]] = lev
    for k, v in enumerate(free):
        full[:, pos[v]] = grid[:, k]
    ok = np.ones(len(full), dtype=bool)
    for u in verts:
        for w in adj[u]:
            if u < w:
                ok &= np.abs(full[:, pos[u]] - full[:, pos[w]]) <= 1
    return full[ok]


def dense_harmonic(problem: DirichletProblem) -> np.ndarray:
    """Solve the mean-value equations with a dense matrix assembled from the neighbor lists."""
    n = problem.n
    A = np.zeros((n, n))
    b = np.zeros(n)
    for i, u in enumerate(problem.unknowns):
        nb = problem.neighbors[u]
        A[i, i] = len(nb)
        for w in nb:
            if w in problem.boundary_values:
                b[i] += problem.boundary_values[w]
            else:
                A[i, problem.unknowns.index(w)] -= 1.0
    return np.linalg.solve(A, b) if n else np.zeros(0)


def grid_problem(nx_, ny, boundary_fn):
    mesh = grid_patch(nx_, ny)
    border = grid_border(nx_, ny)
    bset = set(border)
    bv = {v: boundary_fn(*mesh.positions[v][:2]) for v in border}
    unknowns = [v for v in range(mesh.n_vertices) if v not in bset]
    return mesh, DirichletProblem.on_mesh(mesh, unknowns, bv)


def random_problem(rng, max_unknowns=500):
    """A random Dirichlet problem on a grid patch, a sphere mesh, a torus or a random graph.

    Sizes are drawn so that most problems stay well below ``max_unknowns``
    while some approach it.
    """
    kind = rng.integers(4)
    if kind == 0:
        side = max(int(np.sqrt(max_unknowns)), 2)
        nx_ = int(rng.integers(3, side + 3))
        ny = int(rng.integers(3, max(4, min(2 * side, max_unknowns // (nx_ - 2)) + 3)))
        mesh = grid_patch(nx_, ny)
        boundary = grid_border(nx_, ny)
        adj = mesh.adjacency
        n = mesh.n_vertices
    else:
        if kind == 1:
            adj = octasphere(int(rng.integers(1, 4))).adjacency
        elif kind == 2:
            adj = torus(int(rng.integers(4, 40)), int(rng.integers(3, 20))).adjacency
        else:
            adj = adjacency_of(random_connected_graph(rng, int(rng.integers(4, 2 * max_unknowns)), p=0.0))
            # thin random graphs: a spanning tree plus about one extra edge per vertex
            g = nx.Graph(adj)
            n0 = g.number_of_nodes()
            for u, v in rng.integers(0, n0, size=(n0, 2)):
                if u != v:
                    g.add_edge(int(u), int(v))
            adj = adjacency_of(g)
        n = len(adj)
        k = int(rng.integers(1, max(2, n // 3)))
        boundary = [int(v) for v in rng.choice(n, size=k, replace=False)]
    bset = set(boundary)
    unknowns = [v for v in range(n) if v not in bset][:max_unknowns]
    # unknowns cut off by the truncation become boundary too
    uset = set(unknowns)
    scale = rng.uniform(0.1, 10.0)
    values = {v: float(rng.uniform(-scale, scale)) for v in range(n) if v not in uset}
    return DirichletProblem.from_graph(adj, unknowns, values)


__all__ = [
    "FIXTURES",
    "adjacency_of",
    "random_connected_graph",
    "brute_force_extensions",
    "dense_harmonic",
    "grid_problem",
    "random_problem",
]


# ---- acceptance reporting ---------------------------------------------------

_ACCEPTANCE: dict[int, str] = {}


@pytest.fixture
def acceptance():
    """Call ``acceptance(n, ok, detail)`` once per criterion; lines are echoed and summarized."""

    def record(number, ok, detail):
        line = f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}"
        _ACCEPTANCE[number] = line
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[n])
