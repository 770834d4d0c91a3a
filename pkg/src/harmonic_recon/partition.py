"""Cut a closed surface into disk-like patches with curves through the samples.

A curve network is grown from shortest paths between samples so that every
sample lies on it. The vertices off the network then fall into connected
patches; each must be simply connected for the harmonic step to be well
posed, which is verified through its Euler characteristic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInputError, PathologicalCurveError, TopologyError
from .mesh import Mesh, SampleSet, connected_components, euler_characteristic, is_connected
from .metric import edge_weight, graph_distances, pairwise_sample_distances, trace_path

logger = logging.getLogger(__name__)


@dataclass
class CurveNetwork:
    """Union of sample-through paths.

    ``segments`` are the vertex paths in the order they were added; ``cycles``
    lists the simple closed curves the construction produced (first vertex not
    repeated at the end).
    """

    boundary_vertices: list[int]
    segments: list[list[int]]
    cycles: list[list[int]] = field(default_factory=list)

    @classmethod
    def from_segments(cls, segments, cycles=()):
        verts = sorted({v for seg in segments for v in seg})
        return cls(verts, [list(s) for s in segments], [list(c) for c in cycles])

    def edges(self) -> set[tuple[int, int]]:
        out = set()
        for seg in self.segments:
            for a, b in zip(seg, seg[1:]):
                out.add((a, b) if a < b else (b, a))
        for cyc in self.cycles:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                out.add((a, b) if a < b else (b, a))
        return out

    def graph(self) -> dict[int, list[int]]:
        """Adjacency of the network along its own curve edges."""
        adj: dict[int, set[int]] = {v: set() for v in self.boundary_vertices}
        for a, b in self.edges():
            adj[a].add(b)
            adj[b].add(a)
        return {v: sorted(n) for v, n in adj.items()}

    def validate(self, mesh: Mesh, samples: SampleSet | None = None) -> None:
        for i, seg in enumerate(self.segments):
            if len(set(seg)) != len(seg):
                raise PathologicalCurveError(f"segment {i} revisits a vertex: {seg}", segment=i)
            for a, b in zip(seg, seg[1:]):
                if not mesh.has_edge(a, b):
                    raise PathologicalCurveError(f"segment {i} steps across non-edge ({a}, {b})", segment=i)
        if samples is not None:
            off = [s for s in samples.vertices if s not in set(self.boundary_vertices)]
            if off:
                raise PathologicalCurveError(f"samples {off} are not on the curve network")
        if not is_connected(mesh.adjacency, self.boundary_vertices):
            raise TopologyError("curve network is not connected")


@dataclass
class Partition:
    network: CurveNetwork
    components: list[list[int]]
    component_boundaries: list[list[list[int]]]
    euler: list[int | None]
    network_connected: bool
    warnings: list[str] = field(default_factory=list)

    @property
    def n_components(self) -> int:
        return len(self.components)

    def labels(self, n_vertices: int) -> dict[int, int]:
        """Vertex -> component id, with -1 for network vertices."""
        out = {v: -1 for v in range(n_vertices)}
        for cid, comp in enumerate(self.components):
            for v in comp:
                out[v] = cid
        return out

    def check_invariants(self, mesh: Mesh, samples: SampleSet | None = None) -> None:
        seen: set[int] = set(self.network.boundary_vertices)
        for cid, comp in enumerate(self.components):
            overlap = seen.intersection(comp)
            if overlap:
                raise AssertionError(f"component {cid} overlaps earlier sets at {sorted(overlap)[:5]}")
            seen.update(comp)
        if seen != set(range(mesh.n_vertices)):
            raise AssertionError("components and network do not cover the mesh")
        if samples is not None:
            net = set(self.network.boundary_vertices)
            inside = [s for s in samples.vertices if s not in net]
            if inside:
                raise AssertionError(f"samples {inside} fall inside components")


def _samples_cycle(mesh: Mesh, samples: SampleSet) -> list[int] | None:
    """The samples themselves, if they induce a single simple cycle of length >= 3."""
    verts = samples.vertices
    if len(verts) < 3:
        return None
    sub = mesh.subgraph(verts)
    if any(len(n) != 2 for n in sub.values()) or not is_connected(sub):
        return None
    start = verts[0]
    cyc = [start]
    prev, cur = start, sub[start][0]
    while cur != start:
        cyc.append(cur)
        a, b = sub[cur]
        prev, cur = cur, (b if a == prev else a)
    return cyc


def _cycle_network(cyc):
    segs = [[a, b] for a, b in zip(cyc, cyc[1:] + cyc[:1])]
    return CurveNetwork.from_segments(segs, [cyc])


def _path_to_set(mesh, weight, source, targets, avoid=(), forbidden_edges=()):
    """Shortest path from ``source`` into the vertex set ``targets``.

    The path's interior avoids ``avoid`` and ``targets``; it ends at the
    nearest target (lowest index on ties). Returns None if unreachable.
    """
    targets = set(targets) - {source}
    forbidden_edges = {(min(e), max(e)) for e in forbidden_edges}
    if not targets:
        return None
    n = mesh.n_vertices
    blocked = set(avoid) - targets - {source}
    # targets may only be entered as the final vertex
    dist = graph_distances(mesh.adjacency, n, [source], weight, blocked | targets, forbidden_edges)
    best = None
    for t in sorted(targets):
        for w in mesh.adjacency[t]:
            if w in blocked or w in targets or not np.isfinite(dist[w]):
                continue
            e = (w, t) if w < t else (t, w)
            if e in forbidden_edges:
                continue
            cost = dist[w] + (1.0 if weight is None else weight(w, t))
            if best is None or cost < best[0] - 1e-12 * max(1.0, cost):
                best = (cost, t, w)
    if best is None:
        return None
    _, t, w = best
    head = trace_path(mesh.adjacency, dist, w, weight, blocked | targets, forbidden_edges, sources=[source])
    return head + [t]


def _restricted_path(mesh, weight, a, b, avoid=(), forbidden_edges=()):
    """Shortest a-b path whose interior avoids ``avoid``; None if there is none."""
    return _path_to_set(mesh, weight, a, {b}, avoid, forbidden_edges)


def _second_path(mesh, weight, first):
    """A second a-b path, internally disjoint from ``first`` and not reusing its edge."""
    a, b = first[0], first[-1]
    forbidden = {(min(a, b), max(a, b))} if len(first) == 2 else set()
    return _restricted_path(mesh, weight, a, b, avoid=first[1:-1], forbidden_edges=forbidden)


def _check_samples(mesh: Mesh, samples: SampleSet):
    samples.check_against(mesh)
    if len(samples) < 2:
        raise DegenerateInputError(
            f"partitioning needs at least 2 samples, got {len(samples)}"
        )


def link_cycle(mesh: Mesh, samples: SampleSet, mode="hop") -> CurveNetwork:
    """Greedy sample tour closed into a cycle.

    From the lowest-index sample, repeatedly walk a shortest path (avoiding
    the curve built so far) to the nearest unvisited sample, then close the
    tour back to its start. Samples the tour cannot reach without crossing
    itself are attached to the network afterwards by shortest paths.
    """
    _check_samples(mesh, samples)
    cyc = _samples_cycle(mesh, samples)
    if cyc is not None:
        return _cycle_network(cyc)

    w = edge_weight(mesh, mode)
    n = mesh.n_vertices
    sample_set = set(samples.vertices)
    start = samples.vertices[0]
    tour = [start]
    on_tour = {start}
    segments: list[list[int]] = []
    current = start
    while not sample_set <= on_tour:
        blocked = on_tour - {current}
        dist = graph_distances(mesh.adjacency, n, [current], w, blocked)
        cand = [s for s in sample_set - on_tour if np.isfinite(dist[s])]
        if not cand:
            break
        target = min(cand, key=lambda s: (dist[s], s))
        path = trace_path(mesh.adjacency, dist, target, w, blocked, sources=[current])
        segments.append(path)
        tour.extend(path[1:])
        on_tour.update(path)
        current = target

    cycles = []
    if len(tour) >= 2:
        closing = _second_path(mesh, w, tour)
        if closing is not None:
            closing = closing[::-1]
            segments.append(closing)
            cycles.append(tour + closing[1:-1])
        else:
            # close onto the earliest reachable tour vertex instead; the rest becomes a tail
            anchors = set(tour[:-2])
            back = _path_to_set(mesh, w, current, anchors, avoid=tour)
            if back is None:
                raise PathologicalCurveError(
                    f"cannot close the sample tour ending at {current} without crossing it",
                    segment=len(segments),
                )
            segments.append(back)
            m = tour.index(back[-1])
            cycles.append(tour[m:] + back[1:-1])

    network = _attach_remaining(mesh, w, samples, segments)
    return CurveNetwork.from_segments(network, cycles)


def _attach_remaining(mesh, weight, samples, segments):
    """Hang every sample not yet on the network onto it by a shortest path."""
    net = {v for seg in segments for v in seg}
    segments = list(segments)
    while True:
        rest = [s for s in samples.vertices if s not in net]
        if not rest:
            return segments
        dist = graph_distances(mesh.adjacency, mesh.n_vertices, sorted(net), weight)
        reach = [s for s in rest if np.isfinite(dist[s])]
        if not reach:
            raise PathologicalCurveError(f"samples {rest} cannot reach the curve network")
        s = min(reach, key=lambda v: (dist[v], v))
        path = _path_to_set(mesh, weight, s, net)
        path.reverse()
        segments.append(path)
        net.update(path)


def geodesic_partition(mesh: Mesh, samples: SampleSet, mode="hop") -> CurveNetwork:
    """Grow the network from large cycles through nearby samples.

    The closest sample pair is joined by a shortest path and a second,
    internally disjoint shortest path, giving a cycle. Each later round takes
    the uncovered sample nearest the network, joins it to the network, and
    returns to a different network vertex along a disjoint path, which closes
    another cycle. Rounds repeat until every sample is on the network.
    """
    _check_samples(mesh, samples)
    cyc = _samples_cycle(mesh, samples)
    if cyc is not None:
        return _cycle_network(cyc)

    w = edge_weight(mesh, mode)
    verts = samples.vertices
    D = pairwise_sample_distances(mesh, samples, mode)
    iu = np.triu_indices(len(verts), 1)
    order = np.lexsort((iu[1], iu[0], D[iu]))
    i, j = iu[0][order[0]], iu[1][order[0]]
    a, b = verts[i], verts[j]
    if not np.isfinite(D[i, j]):
        raise PathologicalCurveError(f"samples {a} and {b} are disconnected")
    dist = graph_distances(mesh.adjacency, mesh.n_vertices, [a], w)
    first = trace_path(mesh.adjacency, dist, b, w, sources=[a])
    segments = [first]
    cycles = []
    second = _second_path(mesh, w, first)
    if second is not None:
        second = second[::-1]
        segments.append(second)
        cycles.append(first + second[1:-1])

    net = {v for seg in segments for v in seg}
    while True:
        rest = [s for s in verts if s not in net]
        if not rest:
            break
        dist = graph_distances(mesh.adjacency, mesh.n_vertices, sorted(net), w)
        reach = [s for s in rest if np.isfinite(dist[s])]
        if not reach:
            raise PathologicalCurveError(f"samples {rest} cannot reach the curve network")
        s = min(reach, key=lambda v: (dist[v], v))
        out = _path_to_set(mesh, w, s, net)[::-1]  # anchor p ... s
        p = out[0]
        back = _path_to_set(mesh, w, s, net - {p}, avoid=set(out) | {p})
        segments.append(out)
        if back is not None:
            segments.append(back)
            q = back[-1]
            net_graph = CurveNetwork.from_segments(segments[:-2], cycles).graph()
            closing = _network_path(net_graph, q, p)
            if closing is not None:
                cycles.append(out + back[1:] + closing[1:-1])
        net.update(out)
        if back is not None:
            net.update(back)
    return CurveNetwork.from_segments(segments, cycles)


def _network_path(adj, a, b):
    n = max(adj) + 1
    dist = graph_distances(adj, n, [a])
    if not np.isfinite(dist[b]):
        return None
    return trace_path(adj, dist, b, sources=[a])


def _boundary_trails(mesh: Mesh, comp: set[int]) -> list[list[int]]:
    """Closed boundary walks of the faces touching ``comp``."""
    count: dict[tuple[int, int], int] = {}
    for f in mesh.faces:
        if not any(v in comp for v in f):
            continue
        for a, b in zip(f, f[1:] + f[:1]):
            if a in comp or b in comp:
                continue
            e = (a, b) if a < b else (b, a)
            count[e] = count.get(e, 0) + 1
    unused = {e for e, c in count.items() if c == 1}
    nbrs: dict[int, set[int]] = {}
    for a, b in unused:
        nbrs.setdefault(a, set()).add(b)
        nbrs.setdefault(b, set()).add(a)
    trails = []
    while unused:
        u, v = min(unused)
        unused.discard((u, v))
        nbrs[u].discard(v)
        nbrs[v].discard(u)
        trail = [u]
        cur = v
        while cur != u:
            trail.append(cur)
            if not nbrs[cur]:
                break
            nxt = min(nbrs[cur])
            unused.discard((min(cur, nxt), max(cur, nxt)))
            nbrs[cur].discard(nxt)
            nbrs[nxt].discard(cur)
            cur = nxt
        trails.append(trail)
    return trails


def extract_components(mesh: Mesh, network: CurveNetwork, check_topology: bool = True) -> Partition:
    """Flood-fill the vertices off the network into patches and validate them.

    Each patch must have Euler characteristic 1 (a disk). With a connected
    network on a sphere this always holds; a failure indicates a handle
    (genus > 0) or a disconnected network.

    Raises
    ------
    TopologyError
        Naming the first patch that is not simply connected.
    """
    net = set(network.boundary_vertices)
    bad = [v for v in net if not 0 <= v < mesh.n_vertices]
    if bad:
        raise ValueError(f"network vertices {bad[:5]} are not in the mesh")
    rest = [v for v in range(mesh.n_vertices) if v not in net]
    comps = connected_components(mesh.adjacency, rest)
    connected = is_connected(mesh.adjacency, net)

    euler: list[int | None] = []
    boundaries: list[list[list[int]]] = []
    notes: list[str] = []
    if mesh.faces is None:
        if comps and check_topology:
            notes.append("mesh has no faces; patch simple-connectivity is not checked")
        for comp in comps:
            cset = set(comp)
            ring = sorted({w for v in comp for w in mesh.adjacency[v] if w not in cset})
            boundaries.append([ring])
            euler.append(None)
    else:
        for cid, comp in enumerate(comps):
            chi = euler_characteristic(mesh, comp)
            euler.append(chi)
            if check_topology and chi != 1:
                why = "network is disconnected" if not connected else "surface has a handle here"
                raise TopologyError(
                    f"component {cid} ({len(comp)} vertices) is not simply connected: "
                    f"Euler characteristic {chi}, expected 1 ({why})",
                    component=cid,
                )
            boundaries.append(_boundary_trails(mesh, set(comp)))
        flat = sum(1 for f in mesh.faces if all(v in net for v in f))
        if flat:
            notes.append(f"{flat} faces lie entirely on the curve network (empty patches dropped)")
    for msg in notes:
        logger.warning(msg)
    return Partition(network, comps, boundaries, euler, connected, notes)
