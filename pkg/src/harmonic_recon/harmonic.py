"""Discrete Dirichlet problems: harmonic extension of boundary values.

Every unknown vertex must end up equal to the plain average of its
neighbors. Three routes are provided: in-place relaxation sweeps, conjugate
gradients on the assembled Laplace system, and dense elimination (meant as
a test oracle for small systems).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numba import njit

from .errors import NonConvergenceError, ReconError, SingularProblemError
from .gvf import Envelope, envelope_levels
from .mesh import Mesh, ScalarField, VolumeGrid

logger = logging.getLogger(__name__)


class Scheme(str, Enum):
    RELAXATION = "relaxation"
    CONJUGATE = "conjugate_iterative"
    DIRECT = "direct_oracle"

    @classmethod
    def parse(cls, value) -> "Scheme":
        if isinstance(value, cls):
            return value
        aliases = {"relax": cls.RELAXATION, "cg": cls.CONJUGATE, "direct": cls.DIRECT}
        return aliases.get(value) or cls(value)


class Init(str, Enum):
    GVF = "gvf"
    RANDOM = "random"
    ZEROS = "zeros"


@dataclass
class SolverConfig:
    """Iteration controls shared by all schemes.

    ``tolerance`` bounds the largest mean-value residual
    ``|f(x) - mean of neighbors|`` over the unknowns. ``max_iterations``
    defaults to 100 times the number of unknowns. ``sweep`` selects in-place
    (``gauss_seidel``) or simultaneous (``jacobi``) relaxation updates.
    """

    tolerance: float = 1e-8
    max_iterations: int | None = None
    scheme: Scheme = Scheme.RELAXATION
    init: Init = Init.GVF
    seed: int | None = None
    sweep: str = "gauss_seidel"

    def __post_init__(self):
        self.scheme = Scheme.parse(self.scheme)
        self.init = Init(self.init)
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if self.init is Init.RANDOM and self.seed is None:
            raise ValueError("random initialization needs an explicit seed")
        if self.sweep not in ("gauss_seidel", "jacobi"):
            raise ValueError(f"unknown sweep {self.sweep!r}")

    def iteration_cap(self, n_unknowns: int) -> int:
        if self.max_iterations is not None:
            return self.max_iterations
        return max(100 * n_unknowns, 1)


class DirichletProblem:
    """Unknowns x_1..x_N with neighbor lists and the known boundary values.

    ``neighbors[u]`` lists every neighbor of unknown ``u``; each must be
    another unknown or a key of ``boundary_values``. The unknowns are kept in
    ascending id order, which is also the relaxation sweep order.

    Raises
    ------
    SingularProblemError
        If an unknown is isolated or cannot reach any boundary vertex.
    """

    def __init__(
        self,
        neighbors: Mapping[int, Sequence[int]],
        unknowns: Sequence[int],
        boundary_values: Mapping[int, float],
    ):
        self.unknowns: list[int] = sorted(int(u) for u in unknowns)
        self.boundary_values: dict[int, float] = {int(k): float(v) for k, v in boundary_values.items()}
        self.index = {u: i for i, u in enumerate(self.unknowns)}
        if len(self.index) != len(self.unknowns):
            raise ValueError("duplicate unknowns")
        clash = [u for u in self.unknowns if u in self.boundary_values]
        if clash:
            raise ValueError(f"vertices {clash[:5]} are both unknown and boundary")
        for k, v in self.boundary_values.items():
            if not math.isfinite(v):
                raise ValueError(f"boundary value at {k} is not finite")
        self.neighbors: dict[int, list[int]] = {}
        for u in self.unknowns:
            nb = sorted(int(w) for w in neighbors[u])
            if not nb:
                raise SingularProblemError(f"unknown {u} has no neighbors")
            for w in nb:
                if w not in self.index and w not in self.boundary_values:
                    raise ValueError(f"neighbor {w} of unknown {u} is neither unknown nor boundary")
            self.neighbors[u] = nb
        self._check_grounded()

    def _check_grounded(self):
        # every unknown must reach the boundary; otherwise the system is singular
        reached = set()
        stack = [u for u in self.unknowns if any(w in self.boundary_values for w in self.neighbors[u])]
        reached.update(stack)
        while stack:
            u = stack.pop()
            for w in self.neighbors[u]:
                if w in self.index and w not in reached:
                    # neighbor relation must be symmetric among unknowns
                    reached.add(w)
                    stack.append(w)
        if len(reached) != len(self.unknowns):
            lost = [u for u in self.unknowns if u not in reached]
            raise SingularProblemError(
                f"{len(lost)} unknowns (e.g. {lost[0]}) have no path to a boundary vertex"
            )

    def __repr__(self):
        return f"DirichletProblem(N={self.n}, boundary={len(self.boundary_values)})"

    @property
    def n(self) -> int:
        return len(self.unknowns)

    @classmethod
    def from_graph(cls, adj, unknowns, boundary_values) -> "DirichletProblem":
        """Restrict a full graph to ``unknowns`` plus the boundary values they touch."""
        bv = {}
        for u in unknowns:
            for w in adj[u]:
                if w in boundary_values:
                    bv[w] = boundary_values[w]
        return cls({u: adj[u] for u in unknowns}, unknowns, bv)

    @classmethod
    def on_mesh(cls, mesh: Mesh, unknowns, boundary_values) -> "DirichletProblem":
        return cls.from_graph(mesh.adjacency, unknowns, boundary_values)

    def _csr(self):
        """Neighbor structure over unknown rows plus the constant boundary sums."""
        if not hasattr(self, "_csr_cache"):
            n = self.n
            indptr = np.zeros(n + 1, dtype=np.int64)
            cols = []
            const = np.zeros(n)
            deg = np.zeros(n)
            for i, u in enumerate(self.unknowns):
                nb = self.neighbors[u]
                deg[i] = len(nb)
                row = []
                for w in nb:
                    j = self.index.get(w)
                    if j is None:
                        const[i] += self.boundary_values[w]
                    else:
                        row.append(j)
                cols.extend(row)
                indptr[i + 1] = indptr[i] + len(row)
            cols = np.asarray(cols, dtype=np.int64)
            adjm = sp.csr_matrix((np.ones(len(cols)), cols, indptr), shape=(n, n))
            self._csr_cache = (indptr, cols, const, deg, adjm)
        return self._csr_cache

    def boundary_range(self) -> tuple[float, float]:
        vals = [self.boundary_values[w] for u in self.unknowns for w in self.neighbors[u] if w in self.boundary_values]
        if not vals:
            vals = list(self.boundary_values.values())
        return min(vals), max(vals)

    def full_field(self, x: np.ndarray, domain: str = "surface") -> ScalarField:
        values = dict(self.boundary_values)
        values.update(zip(self.unknowns, (float(v) for v in x)))
        return ScalarField(values, domain)


@dataclass
class LinearSystem:
    """Sparse Laplace system ``A x = C`` over the unknowns of a Dirichlet problem."""

    matrix: sp.csr_matrix
    rhs: np.ndarray
    unknowns: list[int]

    @property
    def n(self) -> int:
        return len(self.unknowns)

    @property
    def index_map(self) -> dict[int, int]:
        return {u: i for i, u in enumerate(self.unknowns)}

    def check_structure(self, degrees: np.ndarray | None = None) -> None:
        """Assert the row structure: degree diagonal, 0/-1 off-diagonal, symmetric, dominant."""
        A = self.matrix.tocsr()
        diag = A.diagonal()
        if degrees is not None and not np.array_equal(diag, degrees):
            raise AssertionError("diagonal differs from vertex degrees")
        off = (A - sp.diags(diag)).tocsr()
        off.eliminate_zeros()
        if off.nnz and not np.all(off.data == -1.0):
            raise AssertionError("off-diagonal entries must be 0 or -1")
        if (A - A.T).count_nonzero():
            raise AssertionError("matrix is not symmetric")
        if np.any(diag < np.asarray(abs(off).sum(axis=1)).ravel()):
            raise AssertionError("matrix is not diagonally dominant")


def assemble_system(problem: DirichletProblem) -> LinearSystem:
    """Build the Laplace rows: degree on the diagonal, -1 per unknown neighbor,
    and the sum of known neighbor values on the right-hand side."""
    _, _, const, deg, adjm = problem._csr()
    A = (sp.diags(deg) - adjm).tocsr()
    system = LinearSystem(A, const.copy(), list(problem.unknowns))
    system.check_structure(deg)
    return system


@dataclass
class Solution:
    field: ScalarField
    iterations: int
    residual: float
    converged: bool
    scheme: Scheme
    values: np.ndarray = field(repr=False, default=None)


@njit(cache=True)
def _gauss_seidel_sweep(x, indptr, cols, const, deg):
    for i in range(x.shape[0]):
        s = const[i]
        for p in range(indptr[i], indptr[i + 1]):
            s += x[cols[p]]
        x[i] = s / deg[i]


def _mean_value_residual(x, problem) -> float:
    if x.size == 0:
        return 0.0
    _, _, const, deg, adjm = problem._csr()
    return float(np.max(np.abs(x - (const + adjm @ x) / deg)))


def initial_values(problem: DirichletProblem, config: SolverConfig, initial=None) -> np.ndarray:
    """Starting vector for the iterative schemes.

    ``initial`` (a mapping or array over the unknowns) overrides ``config.init``.
    The gvf start assigns each unknown the level reached by the discrete
    upper envelope of the boundary values, ranked as a level chain.
    """
    n = problem.n
    if initial is not None:
        if isinstance(initial, Mapping) or isinstance(initial, ScalarField):
            vals = initial.values if isinstance(initial, ScalarField) else initial
            return np.array([float(vals[u]) for u in problem.unknowns])
        x0 = np.asarray(initial, dtype=float)
        if x0.shape != (n,):
            raise ValueError(f"initial vector must have shape ({n},)")
        return x0.copy()
    if config.init is Init.ZEROS:
        return np.zeros(n)
    lo, hi = problem.boundary_range() if problem.boundary_values else (0.0, 0.0)
    if config.init is Init.RANDOM:
        rng = np.random.default_rng(config.seed)
        return rng.uniform(lo, hi, size=n)
    return _gvf_start(problem)


def _gvf_start(problem: DirichletProblem) -> np.ndarray:
    if problem.n == 0:
        return np.zeros(0)
    levels = sorted(set(problem.boundary_values.values()))
    rank = {v: i + 1 for i, v in enumerate(levels)}
    adj: dict[int, list[int]] = {u: problem.neighbors[u] for u in problem.unknowns}
    for u in problem.unknowns:
        for w in problem.neighbors[u]:
            if w in problem.boundary_values:
                adj.setdefault(w, []).append(u)
    seeds = {w: rank[problem.boundary_values[w]] for w in adj if w in problem.boundary_values}
    lev = envelope_levels(adj, seeds, len(levels), Envelope.MIDPOINT, sorted(adj))
    return np.array([levels[lev[u] - 1] for u in problem.unknowns])


def solve_relaxation(
    problem: DirichletProblem,
    config: SolverConfig | None = None,
    initial=None,
    callback: Callable[[int, np.ndarray], None] | None = None,
) -> Solution:
    """Repeated neighbor-averaging sweeps until the mean-value residual drops below tolerance.

    Unknowns are updated in place in ascending id order (or all at once with
    ``sweep="jacobi"``). ``callback(sweep, x)`` is called after every sweep.
    Hitting the iteration cap is reported through ``Solution.converged``.
    """
    config = config or SolverConfig()
    indptr, cols, const, deg, adjm = problem._csr()
    x = initial_values(problem, config, initial)
    cap = config.iteration_cap(problem.n)
    tol = config.tolerance
    res = _mean_value_residual(x, problem)
    it = 0
    while res >= tol and it < cap:
        if config.sweep == "jacobi":
            x = (const + adjm @ x) / deg
        else:
            _gauss_seidel_sweep(x, indptr, cols, const, deg)
        it += 1
        if callback is not None:
            callback(it, x)
        res = _mean_value_residual(x, problem)
    converged = res < tol
    if not converged:
        logger.warning("relaxation stopped after %d sweeps with residual %.3e (tolerance %.1e)", it, res, tol)
    return Solution(problem.full_field(x), it, res, converged, Scheme.RELAXATION, x)


def solve_conjugate(problem: DirichletProblem, config: SolverConfig | None = None, initial=None) -> Solution:
    """Conjugate gradients on the assembled (symmetric positive definite) system."""
    config = config or SolverConfig(scheme=Scheme.CONJUGATE)
    system = assemble_system(problem)
    if problem.n == 0:
        return Solution(problem.full_field(np.zeros(0)), 0, 0.0, True, Scheme.CONJUGATE, np.zeros(0))
    x0 = initial_values(problem, config, initial)
    bnorm = float(np.linalg.norm(system.rhs))
    # stop on ||r|| <= tol * min(1, ||b||): relative and absolute residual both below tol
    atol = config.tolerance * min(1.0, bnorm) if bnorm > 0 else config.tolerance
    count = [0]

    def tick(_):
        count[0] += 1

    x, info = spla.cg(
        system.matrix, system.rhs, x0=x0, rtol=0.0, atol=atol, maxiter=config.iteration_cap(problem.n), callback=tick
    )
    if info < 0:
        raise ReconError(f"conjugate gradient breakdown (info={info})")
    res = _mean_value_residual(x, problem)
    converged = info == 0 and res < config.tolerance
    if not converged:
        logger.warning("conjugate gradient stopped after %d iterations, residual %.3e", count[0], res)
    return Solution(problem.full_field(x), count[0], res, converged, Scheme.CONJUGATE, x)


def solve_direct_oracle(system: LinearSystem) -> np.ndarray:
    """Dense LU elimination. Exact to round-off; intended for small systems and tests."""
    if system.n == 0:
        return np.zeros(0)
    try:
        return np.linalg.solve(system.matrix.toarray(), system.rhs)
    except np.linalg.LinAlgError as exc:
        raise SingularProblemError(f"singular system: {exc}") from exc


def solve(problem: DirichletProblem, config: SolverConfig | None = None, initial=None, callback=None) -> Solution:
    """Dispatch on ``config.scheme``."""
    config = config or SolverConfig()
    if config.scheme is Scheme.RELAXATION:
        return solve_relaxation(problem, config, initial, callback)
    if config.scheme is Scheme.CONJUGATE:
        return solve_conjugate(problem, config, initial)
    x = solve_direct_oracle(assemble_system(problem))
    res = _mean_value_residual(x, problem)
    return Solution(problem.full_field(x), 0, res, res < config.tolerance, Scheme.DIRECT, x)


def harmonic_residual(field, problem: DirichletProblem) -> float:
    """Largest ``|f(x) - mean of f over neighbors of x|`` over the unknowns."""
    vals = field.values if isinstance(field, ScalarField) else field
    worst = 0.0
    for u in problem.unknowns:
        if u not in vals:
            raise KeyError(f"field has no value at unknown vertex {u}")
        acc = 0.0
        for w in problem.neighbors[u]:
            if w not in vals:
                raise KeyError(f"field has no value at vertex {w}")
            acc += vals[w]
        worst = max(worst, abs(vals[u] - acc / len(problem.neighbors[u])))
    return worst


def dirichlet_energy(problem: DirichletProblem, field) -> float:
    """Sum of squared differences over every edge touching an unknown."""
    vals = field.values if isinstance(field, ScalarField) else field
    total = 0.0
    for u in problem.unknowns:
        for w in problem.neighbors[u]:
            if w in problem.index and w < u:
                continue  # count unknown-unknown edges once
            total += (vals[u] - vals[w]) ** 2
    return total


def volume_problem(grid: VolumeGrid, boundary_field) -> DirichletProblem:
    vals = boundary_field.values if isinstance(boundary_field, ScalarField) else boundary_field
    missing = [c for c in grid.boundary_cells if c not in vals]
    if missing:
        raise ReconError(f"boundary field misses {len(missing)} boundary cells, e.g. {missing[:10]}")
    interior = grid.interior_cells
    nbrs = {c: grid.neighbors(c) for c in interior}
    bv = {c: float(vals[c]) for c in grid.boundary_cells}
    return DirichletProblem(nbrs, interior, bv)


def fill_volume(grid: VolumeGrid, boundary_field, config: SolverConfig | None = None, initial=None) -> Solution:
    """Harmonic fill of the interior cells from values on the boundary cells.

    Neighbors follow the grid's adjacency mode with uniform weights; the
    occupancy need not be convex. The returned field covers every occupied
    cell.
    """
    problem = volume_problem(grid, boundary_field)
    sol = solve(problem, config, initial)
    sol.field.domain = "volume"
    return sol


def require_converged(sol: Solution, what: str = "solve") -> Solution:
    if not sol.converged:
        raise NonConvergenceError(
            f"{what} did not converge: residual {sol.residual:.3e} after {sol.iterations} iterations",
            residual=sol.residual,
            iterations=sol.iterations,
        )
    return sol
