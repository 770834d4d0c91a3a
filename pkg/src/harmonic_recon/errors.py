"""Exception hierarchy.

Each class carries the CLI exit code it maps to, so the command line
front end can translate failures without a lookup table.
"""


class ReconError(Exception):
    """Base class for all reconstruction errors."""

    exit_code = 1


class MeshParseError(ReconError):
    """Malformed mesh, volume, or CSV input."""

    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}"
        if line is not None:
            where += f":{line}" if where else f"line {line}"
        super().__init__(f"{where}: {message}" if where else message)


class NonManifoldError(ReconError):
    def __init__(self, edge, count):
        self.edge = edge
        self.count = count
        super().__init__(f"non-manifold edge {edge}: {count} incident faces (max 2)")


class UnsupportedOperationError(ReconError):
    pass


class DisconnectedError(ReconError):
    """Graph or domain that must be connected is not."""


class NoPathError(ReconError):
    def __init__(self, u, v):
        self.u, self.v = u, v
        super().__init__(f"no path between vertices {u} and {v}")


class InfeasibleLevelsError(ReconError):
    """Sample levels violate the gradual variation condition d(x, y) >= |i - j|."""

    exit_code = 2

    def __init__(self, pair, level_gap, distance):
        self.pair = pair
        self.level_gap = level_gap
        self.distance = distance
        x, y = pair
        super().__init__(
            f"samples {x} and {y} are {distance:g} apart but {level_gap} levels apart; "
            "no gradually varied extension exists (need distance >= level gap)"
        )


class TopologyError(ReconError):
    """A partition patch is not simply connected."""

    exit_code = 3

    def __init__(self, message, component=None):
        self.component = component
        super().__init__(message)


class PathologicalCurveError(TopologyError):
    """A linking segment could not be kept simple."""

    def __init__(self, message, segment=None):
        self.segment = segment
        super().__init__(message)


class SingularProblemError(ReconError):
    """Dirichlet problem whose system has no unique solution."""


class NonConvergenceError(ReconError):
    exit_code = 4

    def __init__(self, message, residual=None, iterations=None):
        self.residual = residual
        self.iterations = iterations
        super().__init__(message)


class StageError(ReconError):
    """Wraps an error raised inside a pipeline stage, keeping its exit code."""

    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 1)
        super().__init__(f"[{stage}] {cause}")


class DegenerateInputError(ReconError):
    """Too few samples for the requested operation."""
