"""Exception types shared across the package."""


class OnewayError(Exception):
    """Base class for all package errors."""


class DegenerateSimplex(OnewayError):
    pass


class DimensionMismatch(OnewayError, ValueError):
    pass


class ClockDomain(OnewayError):
    """Clock read before its last synchronisation."""


class EncodingOverflow(OnewayError):
    pass


class DecodeError(OnewayError, ValueError):
    pass


class FutureTimestamp(OnewayError):
    """Signed emission time lies after the receipt time."""


class Underdetermined(OnewayError):
    pass


class NoConvergence(OnewayError):
    pass


class DegenerateGeometry(OnewayError):
    pass


class SingularAtSolution(DegenerateGeometry):
    """The fit converged but its uncertainty is unbounded there."""

    def __init__(self, message, position=None, residuals=(), iterations=0):
        super().__init__(message)
        self.position = position
        self.residuals = residuals
        self.iterations = iterations


class CausalityViolation(OnewayError):
    """Attempt to deliver a recorded signal before it was recorded."""


class ComparisonUnsupported(OnewayError):
    pass


class ValidationError(OnewayError, ValueError):
    """Scenario validation failure; ``path`` names the offending field."""

    def __init__(self, path: str, message: str, line: int | None = None):
        self.path = path
        self.message = message
        self.line = line
        where = f"{path}" + (f" (line {line})" if line is not None else "")
        super().__init__(f"{where}: {message}")
