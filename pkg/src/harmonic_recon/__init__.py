"""Harmonic reconstruction of scalar fields on closed surfaces and voxel solids.

Sparse samples on a surface are joined by a network of curves, values on the
curves are filled in as a gradually varied function, and each patch the
curves cut out (and, optionally, the solid's interior) is filled with the
discrete harmonic extension of its boundary data.
"""

from .errors import (
    DegenerateInputError,
    InfeasibleLevelsError,
    NonConvergenceError,
    PathologicalCurveError,
    ReconError,
    SingularProblemError,
    TopologyError,
)
from .gvf import QuantizedSamples, gvf_extend, gvf_feasible, gvf_on_cycle, quantize, realize_levels
from .harmonic import (
    DirichletProblem,
    LinearSystem,
    SolverConfig,
    assemble_system,
    fill_volume,
    harmonic_residual,
    solve_conjugate,
    solve_direct_oracle,
    solve_relaxation,
)
from .io import export_field, load_mesh, load_samples, load_volume, save_mesh
from .mesh import LevelField, LevelSequence, Mesh, SampleSet, ScalarField, VolumeGrid, euler_characteristic
from .metric import DistanceMode, pairwise_sample_distances, shortest_distances, shortest_path
from .partition import CurveNetwork, Partition, extract_components, geodesic_partition, link_cycle

__version__ = "0.1.0"

__all__ = [
    "CurveNetwork",
    "DegenerateInputError",
    "DirichletProblem",
    "DistanceMode",
    "InfeasibleLevelsError",
    "LevelField",
    "LevelSequence",
    "LinearSystem",
    "Mesh",
    "NonConvergenceError",
    "Partition",
    "PathologicalCurveError",
    "QuantizedSamples",
    "ReconError",
    "SampleSet",
    "ScalarField",
    "SingularProblemError",
    "SolverConfig",
    "TopologyError",
    "VolumeGrid",
    "assemble_system",
    "euler_characteristic",
    "export_field",
    "extract_components",
    "fill_volume",
    "geodesic_partition",
    "gvf_extend",
    "gvf_feasible",
    "gvf_on_cycle",
    "harmonic_residual",
    "link_cycle",
    "load_mesh",
    "load_samples",
    "load_volume",
    "pairwise_sample_distances",
    "quantize",
    "realize_levels",
    "save_mesh",
    "shortest_distances",
    "shortest_path",
    "solve_conjugate",
    "solve_direct_oracle",
    "solve_relaxation",
]
