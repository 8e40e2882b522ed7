"""Exception hierarchy for pipeflow."""


class PipeflowError(Exception):
    """Base class for all library errors."""


class GeometryError(PipeflowError, ValueError):
    pass


class NonPositiveRadius(GeometryError):
    pass


class NotStarShaped(GeometryError):
    pass


class BadResolution(PipeflowError, ValueError):
    pass


class DegenerateTriangle(PipeflowError, ValueError):
    pass


class SolverError(PipeflowError, RuntimeError):
    """Numerical failure inside a linear or eigen solve."""


class SolverStagnation(SolverError):
    pass


class IncompatibleSystem(SolverError):
    pass


class DivergentSeries(PipeflowError, ArithmeticError):
    pass


class EstimateViolation(PipeflowError, AssertionError):
    """A verified a-priori estimate failed on computed data."""


class StepTooCoarse(PipeflowError, RuntimeError):
    pass


class MalformedSamples(PipeflowError, ValueError):
    pass
