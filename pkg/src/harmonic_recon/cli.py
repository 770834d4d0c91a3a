"""Command line front end.

Exit codes: 0 success, 1 I/O or parse error, 2 infeasible levels,
3 topology or pathological curve, 4 non-convergence.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import io
from .errors import NonConvergenceError, ReconError
from .gvf import Envelope, gvf_extend, quantize, realize_levels
from .harmonic import DirichletProblem, SolverConfig, fill_volume, solve
from .mesh import SampleSet, ScalarField, connected_components, require_connected
from .metric import pairwise_sample_distances
from .partition import extract_components
from .pipeline import (
    PARTITIONERS,
    PipelineConfig,
    boundary_field_from_surface,
    run_surface_pipeline,
    run_volume_pipeline,
    surface_to_cells,
)

logger = logging.getLogger("harmonic_recon")

SOLVERS = {"relax": "relaxation", "cg": "conjugate_iterative", "direct": "direct_oracle"}


def read_config(path) -> dict[str, str]:
    """Parse ``key = value`` lines ('#' comments allowed); keys use flag names."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        text = raw.split("#", 1)[0].strip()
        if not text:
            continue
        key, sep, value = text.partition("=")
        if not sep:
            raise ReconError(f"{path}:{lineno}: expected 'key = value'")
        out[key.strip().lstrip("-").replace("-", "_")] = value.strip()
    return out


def _solver_args(p):
    p.add_argument("--solver", choices=sorted(SOLVERS), default="relax")
    p.add_argument("--tol", type=float, default=1e-8, help="max mean-value residual")
    p.add_argument("--max-iters", type=int, default=None, help="default: 100 x unknowns")
    p.add_argument("--init", choices=["gvf", "random", "zeros"], default="gvf")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--sweep", choices=["gauss_seidel", "jacobi"], default="gauss_seidel")


def _bool(text):
    if isinstance(text, bool):
        return text
    return str(text).lower() in ("1", "true", "yes", "on")


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors (exit 1); argparse would exit 2, the infeasibility code
    def error(self, message):
        self.print_usage(sys.stderr)
        raise ReconError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="harmonic-recon", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="key = value file; command line flags take precedence")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("reconstruct", help="full surface (and optional volume) reconstruction")
    p.add_argument("--mesh", help="OFF/OBJ surface; omit with --volume to use the voxel boundary")
    p.add_argument("--samples", required=True, help="CSV vertex_index,value")
    p.add_argument("--volume", help="VOX occupancy file")
    p.add_argument("--adjacency", choices=["six", "twenty_six"], default="six")
    p.add_argument("--partition", choices=["link", "geodesic"], default="link")
    p.add_argument("--distance", choices=["hop", "euclid"], default="hop")
    p.add_argument("--spacing", type=float, default=None)
    p.add_argument("--order", choices=["partition-first", "gvf-first"], default="partition-first")
    p.add_argument("--envelope", choices=[e.value for e in Envelope], default="upper")
    p.add_argument("--keep-residuals", type=_bool, nargs="?", const=True, default=False)
    _solver_args(p)
    p.add_argument("--out-field", help="surface field CSV")
    p.add_argument("--out-ply", help="surface field as ASCII PLY")
    p.add_argument("--out-volume", help="volume field CSV (with --volume)")
    p.add_argument("--report", help="report text file")
    p.set_defaults(func=cmd_reconstruct)

    p = sub.add_parser("gvf", help="gradually varied extension of samples over the whole mesh")
    p.add_argument("--mesh", required=True)
    p.add_argument("--samples", required=True)
    p.add_argument("--spacing", type=float, default=None)
    p.add_argument("--envelope", choices=[e.value for e in Envelope], default="upper")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gvf)

    p = sub.add_parser("partition", help="curve network and patch labels")
    p.add_argument("--mesh", required=True)
    p.add_argument("--samples", required=True)
    p.add_argument("--partition", choices=["link", "geodesic"], default="link")
    p.add_argument("--distance", choices=["hop", "euclid"], default="hop")
    p.add_argument("--out-network", required=True)
    p.add_argument("--out-components", required=True)
    p.set_defaults(func=cmd_partition)

    p = sub.add_parser("harmonic", help="harmonic extension of given boundary values on a mesh")
    p.add_argument("--mesh", required=True)
    p.add_argument("--boundary", required=True, help="CSV vertex_index,value of known vertices")
    _solver_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_harmonic)

    p = sub.add_parser("fill3d", help="harmonic fill of a voxel solid from boundary cell values")
    p.add_argument("--volume", required=True)
    p.add_argument("--boundary", required=True, help="CSV cell_index,value for every boundary cell")
    p.add_argument("--adjacency", choices=["six", "twenty_six"], default="six")
    _solver_args(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fill3d)

    p = sub.add_parser("check", help="validate inputs without solving")
    p.add_argument("--mesh")
    p.add_argument("--samples")
    p.add_argument("--volume")
    p.add_argument("--spacing", type=float, default=None)
    p.set_defaults(func=cmd_check)
    return parser


def _solver_config(args) -> SolverConfig:
    return SolverConfig(
        tolerance=args.tol,
        max_iterations=args.max_iters,
        scheme=SOLVERS[args.solver],
        init=args.init,
        seed=args.seed,
        sweep=args.sweep,
    )


def cmd_reconstruct(args) -> int:
    solver = _solver_config(args)
    config = PipelineConfig(
        distance=args.distance,
        spacing=args.spacing,
        partition=args.partition,
        surface_solver=solver,
        volume_solver=solver,
        order=args.order,
        envelope=args.envelope,
        keep_residuals=args.keep_residuals,
        out_field=args.out_field,
        out_ply=args.out_ply,
        out_volume=args.out_volume,
        report=args.report,
    )
    grid = io.load_volume(args.volume, args.adjacency) if args.volume else None
    if args.mesh:
        mesh = io.load_mesh(args.mesh)
        v2c = surface_to_cells(mesh, grid) if grid is not None else None
    elif grid is not None:
        mesh, cells = grid.surface_mesh()
        v2c = dict(enumerate(cells))
    else:
        raise ReconError("reconstruct needs --mesh or --volume")
    samples = io.load_samples(args.samples, mesh)

    result = run_surface_pipeline(mesh, samples, config)
    report = result.report
    if args.out_field:
        io.export_field(mesh, result.field, "csv", args.out_field)
    if args.out_ply:
        io.export_field(mesh, result.field, "ply", args.out_ply)

    vol = None
    if grid is not None:
        vol = run_volume_pipeline(grid, boundary_field_from_surface(result.field, v2c), config)
        if args.out_volume:
            io.export_field(grid, vol.field, "csv", args.out_volume)
        report.extra["volume_iterations"] = vol.solution.iterations
        report.extra["volume_residual"] = f"{vol.solution.residual:.3e}"
        report.extra["volume_converged"] = "yes" if vol.solution.converged else "NO"
        report.timings.update({f"volume.{k}": t for k, t in vol.report.timings.items()})

    text = report.to_text()
    if args.report:
        Path(args.report).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if not report.converged or (vol is not None and not vol.solution.converged):
        raise NonConvergenceError("at least one solve hit the iteration cap before converging")
    return 0


def cmd_gvf(args) -> int:
    mesh = io.load_mesh(args.mesh)
    require_connected(mesh)
    samples = io.load_samples(args.samples, mesh)
    q = quantize(samples, pairwise_sample_distances(mesh, samples), args.spacing)
    levels = gvf_extend(mesh, q, args.envelope)
    io.export_field(mesh, realize_levels(levels, q.levels), "csv", args.out)
    print(f"levels: {q.levels.n} spacing: {q.levels.spacing:.17g}")
    return 0


def cmd_partition(args) -> int:
    mesh = io.load_mesh(args.mesh)
    require_connected(mesh)
    samples = io.load_samples(args.samples, mesh)
    network = PARTITIONERS[args.partition](mesh, samples, args.distance)
    network.validate(mesh, samples)
    part = extract_components(mesh, network)
    io.write_network_csv(network.segments, args.out_network)
    io.write_components_csv(part.labels(mesh.n_vertices), args.out_components)
    print(f"segments: {len(network.segments)} network_vertices: {len(network.boundary_vertices)} "
          f"components: {part.n_components}")
    return 0


def cmd_harmonic(args) -> int:
    mesh = io.load_mesh(args.mesh)
    known = io.load_field(args.boundary).values
    unknown = [v for v in range(mesh.n_vertices) if v not in known]
    values = dict(known)
    worst = 0.0
    ok = True
    config = _solver_config(args)
    for comp in connected_components(mesh.adjacency, unknown):
        sol = solve(DirichletProblem.on_mesh(mesh, comp, known), config)
        values.update(zip(comp, map(float, sol.values)))
        worst = max(worst, sol.residual)
        ok &= sol.converged
    io.export_field(mesh, ScalarField(values), "csv", args.out)
    print(f"residual: {worst:.3e} converged: {'yes' if ok else 'NO'}")
    if not ok:
        raise NonConvergenceError("harmonic solve did not converge", residual=worst)
    return 0


def cmd_fill3d(args) -> int:
    grid = io.load_volume(args.volume, args.adjacency)
    boundary = io.load_field(args.boundary, "volume").values
    sol = fill_volume(grid, boundary, _solver_config(args))
    io.export_field(grid, sol.field, "csv", args.out)
    print(f"interior: {len(grid.interior_cells)} iterations: {sol.iterations} "
          f"residual: {sol.residual:.3e} converged: {'yes' if sol.converged else 'NO'}")
    if not sol.converged:
        raise NonConvergenceError("volume fill did not converge", residual=sol.residual)
    return 0


def cmd_check(args) -> int:
    mesh = None
    if args.mesh:
        mesh = io.load_mesh(args.mesh)
        print(f"mesh: {mesh.n_vertices} vertices, {len(mesh.edges)} edges, "
              f"{len(mesh.faces or ())} faces")
        require_connected(mesh)
        print("connected: yes")
        if mesh.is_closed():
            print(f"closed: yes  euler: {mesh.euler_characteristic()}  genus: {mesh.genus()}")
        else:
            print("closed: no")
    if args.volume:
        grid = io.load_volume(args.volume)
        print(f"volume: {grid.dims} occupied={grid.n_occupied} boundary={len(grid.boundary_cells)} "
              f"interior={len(grid.interior_cells)}")
        if mesh is None:
            mesh, _ = grid.surface_mesh()
    if args.samples:
        if mesh is None:
            raise ReconError("check --samples needs --mesh or --volume")
        samples: SampleSet = io.load_samples(args.samples, mesh)
        q = quantize(samples, pairwise_sample_distances(mesh, samples), args.spacing)
        print(f"samples: {len(samples)} levels: {q.levels.n} spacing: {q.levels.spacing:.17g} feasible: yes")
    return 0


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    parser = build_parser()
    try:
        if known.config:
            cfg = read_config(known.config)
            # config values become subcommand defaults, so explicit flags win
            for action in parser._subparsers._group_actions:
                for sp in action.choices.values():
                    for a in sp._actions:
                        if a.dest in cfg:
                            a.default = cfg[a.dest]
                            a.required = False
        args = parser.parse_args(argv)
    except ReconError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(
        level=logging.WARNING - 10 * min(args.verbose, 2),
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ReconError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
