"""Gradually varied functions.

A level assignment is gradually varied when adjacent vertices differ by at
most one level. Samples admit a gradually varied extension over a connected
graph exactly when every pair of samples is at least as far apart (in hops)
as their level indices are; this module quantizes real samples into levels,
checks that condition, and builds extensions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import DisconnectedError, InfeasibleLevelsError
from .mesh import LevelField, LevelSequence, Mesh, SampleSet, ScalarField, graph_vertices, is_connected
from .metric import graph_distances


class Envelope(str, Enum):
    UPPER = "upper"
    LOWER = "lower"
    MIDPOINT = "midpoint"


@dataclass
class QuantizedSamples:
    """Samples snapped onto a level chain.

    ``indices`` are 1-based level indices and ``residuals`` hold
    ``value - level`` for each sample vertex.
    """

    levels: LevelSequence
    indices: dict[int, int]
    residuals: dict[int, float] = field(default_factory=dict)

    @property
    def vertices(self) -> list[int]:
        return sorted(self.indices)

    def restricted(self, vertices: Iterable[int]) -> "QuantizedSamples":
        keep = set(vertices)
        return QuantizedSamples(
            self.levels,
            {v: i for v, i in self.indices.items() if v in keep},
            {v: r for v, r in self.residuals.items() if v in keep},
        )


def _snap(values: np.ndarray, start: float, spacing: float, n: int) -> np.ndarray:
    # nearest level, exact halves go to the lower one
    t = (values - start) / spacing
    idx = np.ceil(t - 0.5).astype(int)
    return np.clip(idx, 0, n - 1) + 1


def quantize(samples: SampleSet, distances: np.ndarray, spacing: float | None = None) -> QuantizedSamples:
    """Snap sample values onto a uniform level chain spanning their range.

    Without ``spacing`` the step is the largest pairwise slope
    ``|f(x) - f(y)| / d(x, y)``, which guarantees the feasibility condition.
    A user-supplied step is accepted only if the result is still feasible.

    Parameters
    ----------
    samples : SampleSet
    distances : ndarray
        Pairwise sample distances, rows in ``samples.vertices`` order.
    spacing : float, optional
        Level step. Must be positive.

    Raises
    ------
    InfeasibleLevelsError
        If the user spacing violates the feasibility condition.
    """
    verts = samples.vertices
    vals = samples.values
    d = np.asarray(distances, dtype=float)
    if d.shape != (len(verts), len(verts)):
        raise ValueError(f"distance matrix must be {len(verts)}x{len(verts)}, got {d.shape}")
    if not np.isfinite(d).all():
        i, j = np.argwhere(~np.isfinite(d))[0]
        raise DisconnectedError(f"samples {verts[i]} and {verts[j]} are not connected")

    lo, hi = float(vals.min()), float(vals.max())
    auto = spacing is None
    if auto:
        spacing = _lipschitz_constant(vals, d)
        if spacing == 0.0:
            spacing = 1.0
    elif not spacing > 0:
        raise ValueError("spacing must be positive")

    for _ in range(8):
        n = int(math.ceil((hi - lo) / spacing - 1e-9)) + 1
        n = max(n, 1)
        levels = LevelSequence.uniform(lo, spacing, n)
        idx = _snap(vals, lo, spacing, n)
        q = QuantizedSamples(
            levels,
            {v: int(i) for v, i in zip(verts, idx)},
            {v: float(x - levels.levels[i - 1]) for v, x, i in zip(verts, vals, idx)},
        )
        ok, pair = gvf_feasible(q, d)
        if ok:
            return q
        if not auto:
            break
        # only reachable through round-off at exact half-steps
        spacing *= 1 + 1e-12
    x, y = pair
    gap = abs(q.indices[x] - q.indices[y])
    raise InfeasibleLevelsError(pair, gap, float(d[verts.index(x), verts.index(y)]))


def _lipschitz_constant(vals: np.ndarray, d: np.ndarray) -> float:
    k = len(vals)
    if k < 2:
        return 0.0
    iu = np.triu_indices(k, 1)
    dd = d[iu]
    if (dd <= 0).any():
        raise ValueError("distinct samples must be at positive distance")
    return float(np.max(np.abs(vals[iu[0]] - vals[iu[1]]) / dd))


def gvf_feasible(quantized: QuantizedSamples, distances: np.ndarray) -> tuple[bool, tuple[int, int] | None]:
    """Check ``d(x, y) >= |i - j|`` for every sample pair.

    Returns ``(True, None)`` or ``(False, (x, y))`` where ``(x, y)`` is a pair
    with the largest violation ``|i - j| - d(x, y)``.
    """
    verts = quantized.vertices
    idx = np.array([quantized.indices[v] for v in verts], dtype=float)
    d = np.asarray(distances, dtype=float)
    gap = np.abs(idx[:, None] - idx[None, :]) - d
    if gap.size == 0:
        return True, None
    worst = np.unravel_index(np.argmax(gap), gap.shape)
    if gap[worst] > 1e-9:
        i, j = sorted(worst)
        return False, (verts[i], verts[j])
    return True, None


def _as_graph(graph) -> tuple[object, list[int], int]:
    adj = graph.adjacency if isinstance(graph, Mesh) else graph
    verts = sorted(graph_vertices(adj))
    n = (max(verts) + 1) if verts else 0
    return adj, verts, n


def envelope_levels(
    adj,
    seeds: Mapping[int, int],
    n_levels: int,
    rule: Envelope | str = Envelope.UPPER,
    vertices: Sequence[int] | None = None,
) -> dict[int, int]:
    """Discrete McShane envelope of seeded levels over a graph.

    Upper rule: ``F(b) = min_j (i_j + d(b, x_j))`` clamped to ``n_levels``;
    lower rule: ``max_j (i_j - d(b, x_j))`` clamped to 1; midpoint: floor of
    their mean. No feasibility check is made here.
    """
    rule = Envelope(rule)
    if vertices is None:
        vertices = sorted(graph_vertices(adj))
    n = (max(vertices) + 1) if vertices else 0
    out: dict[int, int] = {}
    if not seeds:
        raise ValueError("no seed levels given")
    upper = lower = None
    if rule in (Envelope.UPPER, Envelope.MIDPOINT):
        upper = graph_distances(adj, n, {v: float(i) for v, i in seeds.items()})
    if rule in (Envelope.LOWER, Envelope.MIDPOINT):
        # max_j (i_j - d) = -(min_j (-i_j + d)); shift offsets to stay non-negative
        top = max(seeds.values())
        lower = top - graph_distances(adj, n, {v: float(top - i) for v, i in seeds.items()})
    for b in vertices:
        if rule is Envelope.UPPER:
            val = min(upper[b], n_levels)
        elif rule is Envelope.LOWER:
            val = max(lower[b], 1)
        else:
            val = math.floor((min(upper[b], n_levels) + max(lower[b], 1)) / 2)
        if not math.isfinite(val):
            raise DisconnectedError(f"vertex {b} is not connected to any seed")
        out[b] = int(val)
    return out


def gvf_extend(graph, quantized: QuantizedSamples, rule: Envelope | str = Envelope.UPPER) -> LevelField:
    """Gradually varied extension of the sample levels over a connected graph.

    ``graph`` is a Mesh or an adjacency mapping (e.g. an induced subgraph).
    Distances are hop counts inside ``graph``. The default upper envelope is
    the pointwise largest valid extension.

    Raises
    ------
    InfeasibleLevelsError
        If some sample pair is closer than its level gap.
    """
    adj, verts, n = _as_graph(graph)
    vset = set(verts)
    missing = [v for v in quantized.indices if v not in vset]
    if missing:
        raise ValueError(f"sample vertices {missing[:5]} are not in the domain")
    if not is_connected(adj, verts):
        raise DisconnectedError("extension domain is not connected")
    svs = quantized.vertices
    dist = np.array([graph_distances(adj, n, [s])[svs] for s in svs]).reshape(len(svs), len(svs))
    ok, pair = gvf_feasible(quantized, dist)
    if not ok:
        x, y = pair
        raise InfeasibleLevelsError(
            pair,
            abs(quantized.indices[x] - quantized.indices[y]),
            float(dist[svs.index(x), svs.index(y)]),
        )
    levels = envelope_levels(adj, quantized.indices, quantized.levels.n, rule, verts)
    return LevelField(levels)


def cycle_graph(cycle: Sequence[int]) -> dict[int, list[int]]:
    """Adjacency of a closed vertex sequence (first vertex not repeated at the end)."""
    cyc = list(cycle)
    if len(cyc) > 1 and cyc[0] == cyc[-1]:
        cyc = cyc[:-1]
    if len(set(cyc)) != len(cyc):
        raise ValueError("cycle is not simple: a vertex repeats")
    k = len(cyc)
    if k < 3:
        raise ValueError("a closed cycle needs at least 3 vertices")
    return {v: sorted({cyc[i - 1], cyc[(i + 1) % k]}) for i, v in enumerate(cyc)}


def gvf_on_cycle(cycle: Sequence[int], quantized: QuantizedSamples, rule=Envelope.UPPER) -> LevelField:
    """Gradually varied interpolation around one closed boundary curve.

    Distances are measured along the cycle (the shorter arc).
    """
    adj = cycle_graph(cycle)
    off = [v for v in quantized.indices if v not in adj]
    if off:
        raise ValueError(f"sample vertices {off[:5]} do not lie on the cycle")
    return gvf_extend(adj, quantized, rule)


def realize_levels(field: LevelField, levels: LevelSequence, domain: str = "surface") -> ScalarField:
    return ScalarField({v: levels.value(i) for v, i in field.assignment.items()}, domain)
