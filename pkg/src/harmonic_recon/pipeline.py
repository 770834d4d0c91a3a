"""End-to-end reconstruction: levels, partition, curve values, patch solves, volume fill."""

from __future__ import annotations

import logging
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any

from .errors import ReconError, StageError
from .gvf import Envelope, QuantizedSamples, gvf_extend, quantize, realize_levels
from .harmonic import DirichletProblem, Solution, SolverConfig, fill_volume, harmonic_residual, solve
from .mesh import LevelField, Mesh, SampleSet, ScalarField, VolumeGrid, require_connected
from .metric import DistanceMode, pairwise_sample_distances
from .partition import CurveNetwork, Partition, extract_components, geodesic_partition, link_cycle

logger = logging.getLogger(__name__)

PARTITIONERS = {"link": link_cycle, "link_cycle": link_cycle, "geodesic": geodesic_partition}


@dataclass
class PipelineConfig:
    distance: DistanceMode = DistanceMode.HOP
    spacing: float | None = None
    partition: str = "link"
    surface_solver: SolverConfig = field(default_factory=SolverConfig)
    volume_solver: SolverConfig = field(default_factory=SolverConfig)
    order: str = "partition-first"
    envelope: Envelope = Envelope.UPPER
    keep_residuals: bool = False
    out_field: str | None = None
    out_ply: str | None = None
    out_volume: str | None = None
    report: str | None = None

    def __post_init__(self):
        self.distance = DistanceMode.parse(self.distance)
        self.envelope = Envelope(self.envelope)
        if self.partition not in PARTITIONERS:
            raise ValueError(f"unknown partition algorithm {self.partition!r}")
        if self.order not in ("partition-first", "gvf-first"):
            raise ValueError(f"unknown order {self.order!r}")
        paths = [p for p in (self.out_field, self.out_ply, self.out_volume, self.report) if p]
        if len(set(paths)) != len(paths):
            raise ValueError("output paths must be distinct")


@dataclass
class ComponentResult:
    component: int
    size: int
    iterations: int
    residual: float
    converged: bool


@dataclass
class PipelineReport:
    timings: dict[str, float] = field(default_factory=dict)
    level_count: int | None = None
    spacing: float | None = None
    feasible: bool | None = None
    component_count: int | None = None
    components: list[ComponentResult] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def converged(self) -> bool:
        return all(c.converged for c in self.components)

    def to_text(self) -> str:
        """``key: value`` lines; timing lines start with ``time.``."""
        lines = []
        if self.level_count is not None:
            lines.append(f"levels: {self.level_count}")
        if self.spacing is not None:
            lines.append(f"spacing: {self.spacing:.17g}")
        if self.feasible is not None:
            lines.append(f"feasible: {'yes' if self.feasible else 'no'}")
        for k, v in self.extra.items():
            lines.append(f"{k}: {v}")
        if self.component_count is not None:
            lines.append(f"components: {self.component_count}")
        for c in self.components:
            lines.append(
                f"component {c.component}: size={c.size} iterations={c.iterations} "
                f"residual={c.residual:.3e} converged={'yes' if c.converged else 'NO'}"
            )
        lines.append(f"converged: {'yes' if self.converged else 'NO'}")
        for w in self.warnings:
            lines.append(f"warning: {w}")
        for n in self.notes:
            lines.append(f"note: {n}")
        for stage, t in self.timings.items():
            lines.append(f"time.{stage}: {t:.6f}s")
        return "\n".join(lines) + "\n"


@contextmanager
def _stage(report: PipelineReport, name: str):
    t0 = time.perf_counter()
    try:
        yield
    except StageError:
        raise
    except ReconError as exc:
        raise StageError(name, exc) from exc
    finally:
        report.timings[name] = report.timings.get(name, 0.0) + time.perf_counter() - t0


@dataclass
class SurfaceResult:
    field: ScalarField
    partition: Partition
    report: PipelineReport
    quantized: QuantizedSamples
    curve_field: ScalarField
    problems: list[DirichletProblem]
    solutions: list[Solution]


def run_surface_pipeline(mesh: Mesh, samples: SampleSet, config: PipelineConfig | None = None) -> SurfaceResult:
    """Reconstruct a field on every surface vertex from the samples.

    Stages: quantize the samples into levels and check feasibility; cut the
    surface with a curve network through the samples; fill the network with a
    gradually varied interpolation; solve the Dirichlet problem in every
    patch. Sample vertices keep their level values exactly.
    """
    config = config or PipelineConfig()
    report = PipelineReport()

    with _stage(report, "validate"):
        require_connected(mesh)
        samples.check_against(mesh)

    with _stage(report, "levels"):
        # level gaps are per edge, so feasibility is always judged in hops
        dist = pairwise_sample_distances(mesh, samples, DistanceMode.HOP)
        q = quantize(samples, dist, config.spacing)
    report.level_count = q.levels.n
    report.spacing = q.levels.spacing
    report.feasible = True

    with _stage(report, "partition"):
        if len(samples) == 1:
            s = samples.vertices[0]
            network = CurveNetwork([s], [[s]], [])
            report.warnings.append("single sample: partition skipped, one patch around the sample")
        else:
            network = PARTITIONERS[config.partition](mesh, samples, config.distance)
            network.validate(mesh, samples)
        part = extract_components(mesh, network)
        part.check_invariants(mesh, samples)
        report.warnings.extend(part.warnings)
    report.component_count = part.n_components

    with _stage(report, "curve_gvf"):
        whole = None
        if config.order == "gvf-first":
            whole = gvf_extend(mesh, q, config.envelope)
            levels = {v: whole.assignment[v] for v in network.boundary_vertices}
        else:
            levels = gvf_extend(network.graph(), q, config.envelope).assignment
        curve = realize_levels(LevelField(levels), q.levels, "curve")
        if config.keep_residuals:
            for v, r in q.residuals.items():
                curve.values[v] += r

    values = dict(curve.values)
    problems, solutions = [], []
    with _stage(report, "harmonic"):
        whole_values = realize_levels(whole, q.levels).values if whole is not None else None
        for cid, comp in enumerate(part.components):
            problem = DirichletProblem.on_mesh(mesh, comp, curve.values)
            init = None
            if whole_values is not None and config.surface_solver.init.value == "gvf":
                init = {u: whole_values[u] for u in comp}
            sol = solve(problem, config.surface_solver, init)
            problems.append(problem)
            solutions.append(sol)
            report.components.append(
                ComponentResult(cid, len(comp), sol.iterations, sol.residual, sol.converged)
            )
            if not sol.converged:
                report.warnings.append(f"component {cid} did not converge")
            for u, x in zip(problem.unknowns, sol.values):
                values[u] = float(x)
    report.notes.append("smoothing by subdivision is not performed")
    return SurfaceResult(ScalarField(values, "surface"), part, report, q, curve, problems, solutions)


@dataclass
class VolumeResult:
    field: ScalarField
    report: PipelineReport
    solution: Solution


def run_volume_pipeline(grid: VolumeGrid, surface_field, config: PipelineConfig | None = None) -> VolumeResult:
    """Fill the solid's interior cells from a field given on its boundary cells."""
    config = config or PipelineConfig()
    report = PipelineReport()
    vals = surface_field.values if isinstance(surface_field, ScalarField) else surface_field
    missing = [c for c in grid.boundary_cells if c not in vals]
    if missing:
        raise StageError(
            "volume",
            ReconError(f"surface field misses {len(missing)} boundary cells: {missing[:20]}"),
        )
    with _stage(report, "volume"):
        sol = fill_volume(grid, {c: vals[c] for c in grid.boundary_cells}, config.volume_solver)
    report.component_count = 1 if grid.interior_cells else 0
    if grid.interior_cells:
        report.components.append(
            ComponentResult(0, len(grid.interior_cells), sol.iterations, sol.residual, sol.converged)
        )
    if not sol.converged:
        report.warnings.append("volume fill did not converge")
    report.extra["volume_cells"] = grid.n_occupied
    report.extra["adjacency"] = grid.adjacency_mode.value
    return VolumeResult(sol.field, report, sol)


def surface_to_cells(mesh: Mesh, grid: VolumeGrid) -> dict[int, int]:
    """Map mesh vertices to boundary cells by matching positions to cell coordinates.

    Every boundary cell must receive a vertex; vertices off the boundary are an error.
    """
    if mesh.positions is None:
        raise ReconError("mesh needs positions to be matched against voxel cells")
    nx, ny, nz = grid.dims
    out: dict[int, int] = {}
    for v, p in enumerate(mesh.positions):
        x, y, z = (int(round(c)) for c in p)
        if not (0 <= x < nx and 0 <= y < ny and 0 <= z < nz):
            raise ReconError(f"vertex {v} at {tuple(p)} lies outside the voxel grid")
        cell = grid.flat_index(x, y, z)
        if not grid.is_boundary(cell):
            raise ReconError(f"vertex {v} maps to cell {cell}, which is not a boundary cell")
        out[v] = cell
    missing = set(grid.boundary_cells) - set(out.values())
    if missing:
        raise ReconError(f"{len(missing)} boundary cells have no surface vertex, e.g. {sorted(missing)[:10]}")
    return out


def recheck_residuals(result: SurfaceResult) -> list[float]:
    """Recompute each patch's mean-value residual on the final assembled field."""
    return [harmonic_residual(result.field, p) for p in result.problems]


def boundary_field_from_surface(field: ScalarField, vertex_to_cell: dict[int, int]) -> dict[int, float]:
    return {vertex_to_cell[v]: x for v, x in field.values.items()}


__all__ = [
    "PipelineConfig",
    "PipelineReport",
    "SurfaceResult",
    "VolumeResult",
    "run_surface_pipeline",
    "run_volume_pipeline",
    "surface_to_cells",
    "recheck_residuals",
    "boundary_field_from_surface",
]
