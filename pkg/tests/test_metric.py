"""Graph distances and shortest paths, checked against networkx."""

import networkx as nx
import numpy as np
import pytest

from conftest import adjacency_of, random_connected_graph
from harmonic_recon.errors import NoPathError, UnsupportedOperationError
from harmonic_recon.mesh import Mesh, SampleSet
from harmonic_recon.metric import (
    DistanceMode,
    graph_distances,
    pairwise_sample_distances,
    path_length,
    shortest_distances,
    shortest_path,
)
from harmonic_recon.shapes import bumpy_sphere, octasphere


def cycle_mesh(n):
    return Mesh(n, edges=[(i, (i + 1) % n) for i in range(n)])


def path_mesh(n):
    return Mesh(n, edges=[(i, i + 1) for i in range(n - 1)])


def test_trivial_distances():
    mesh = cycle_mesh(6)
    d = shortest_distances(mesh, 0)
    assert d[0] == 0
    assert d[1] == 1
    # opposite vertex of a 6-cycle
    assert d[3] == 3


def test_pairwise_path_example():
    # samples at a, c, e of a-b-c-d-e
    d = pairwise_sample_distances(path_mesh(5), SampleSet({0: 0.0, 2: 1.0, 4: 2.0}))
    np.testing.assert_array_equal(d, [[0, 2, 4], [2, 0, 2], [4, 2, 0]])
    one = pairwise_sample_distances(path_mesh(5), SampleSet({3: 0.0}))
    np.testing.assert_array_equal(one, [[0.0]])
    two = pairwise_sample_distances(path_mesh(5), SampleSet({1: 0.0, 2: 0.0}))
    assert two[0, 1] == 1


@pytest.mark.parametrize("seed", range(8))
def test_hop_distances_match_bfs(seed):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, int(rng.integers(5, 40)), p=0.1)
    adj = adjacency_of(g)
    src = int(rng.integers(len(adj)))
    d = graph_distances(adj, len(adj), [src])
    ref = nx.single_source_shortest_path_length(g, src)
    assert all(d[v] == ref[v] for v in g.nodes)


def test_euclidean_distances_match_dijkstra():
    mesh = bumpy_sphere(1, seed=4)
    g = nx.Graph()
    for u, v in mesh.edges:
        g.add_edge(u, v, weight=float(np.linalg.norm(mesh.positions[u] - mesh.positions[v])))
    d = shortest_distances(mesh, 7, DistanceMode.EUCLIDEAN)
    ref = nx.single_source_dijkstra_path_length(g, 7)
    np.testing.assert_allclose([d[v] for v in range(mesh.n_vertices)], [ref[v] for v in range(mesh.n_vertices)], rtol=1e-12)


def test_euclidean_needs_positions():
    with pytest.raises(UnsupportedOperationError):
        shortest_distances(cycle_mesh(4), 0, "euclidean_edge_weight")


def test_distance_mode_aliases():
    assert DistanceMode.parse("euclid") is DistanceMode.EUCLIDEAN
    assert DistanceMode.parse("hop") is DistanceMode.HOP
    with pytest.raises(ValueError):
        DistanceMode.parse("manhattan")


def test_path_trivial_cases():
    mesh = cycle_mesh(5)
    assert shortest_path(mesh, 2, 2) == [2]
    assert shortest_path(mesh, 2, 3) == [2, 3]


def test_path_tie_break_lowest_index():
    # both 0-1-2 and 0-3-2 are shortest; the lower intermediate wins
    assert shortest_path(cycle_mesh(4), 0, 2) == [0, 1, 2]
    assert shortest_path(cycle_mesh(4), 2, 0) == [2, 1, 0]


def test_no_path():
    mesh = Mesh(4, edges=[(0, 1), (2, 3)])
    with pytest.raises(NoPathError):
        shortest_path(mesh, 0, 3)
    assert np.isinf(shortest_distances(mesh, 0)[3])


@pytest.mark.parametrize("mode", ["hop", "euclidean_edge_weight"])
def test_paths_are_shortest_and_valid(mode):
    mesh = octasphere(2)
    rng = np.random.default_rng(3)
    for _ in range(20):
        u, v = (int(x) for x in rng.choice(mesh.n_vertices, 2, replace=False))
        p = shortest_path(mesh, u, v, mode)
        assert p[0] == u and p[-1] == v
        assert all(mesh.has_edge(a, b) for a, b in zip(p, p[1:]))
        assert len(set(p)) == len(p)
        assert path_length(mesh, p, mode) == pytest.approx(shortest_distances(mesh, u, mode)[v], rel=1e-12)


def test_pairwise_symmetric_zero_diagonal():
    mesh = octasphere(2)
    s = SampleSet({v: 0.0 for v in (0, 5, 17, 33, 60)})
    for mode in ("hop", "euclidean_edge_weight"):
        d = pairwise_sample_distances(mesh, s, mode)
        np.testing.assert_array_equal(d, d.T)
        np.testing.assert_array_equal(np.diag(d), 0)
        assert (d[~np.eye(5, dtype=bool)] > 0).all()


def test_blocked_vertices_and_edges():
    adj = adjacency_of(nx.cycle_graph(6))
    d = graph_distances(adj, 6, [0], blocked={1})
    assert d[2] == 4
    d = graph_distances(adj, 6, [0], forbidden_edges={(0, 5)})
    assert d[5] == 5
