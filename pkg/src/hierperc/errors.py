"""Exception types shared across the package."""


class HierpercError(Exception):
    """Base class for all package errors."""


class InvalidInputError(HierpercError):
    """An argument violates a documented precondition."""


class CapacityError(HierpercError):
    """A requested object exceeds the configured size budget."""


class UnsupportedProfileError(InvalidInputError):
    """The operation requires a critical-regime profile (delta == 1, C2 > 0)."""


class CouplingOrderError(InvalidInputError):
    """Thinning target is not dominated by the source profile on every shell."""


class GraphParseError(HierpercError):
    """A graph file is malformed; carries the offending line number."""

    def __init__(self, message, line_number):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class NumericalFailureError(HierpercError):
    """An iterative solve did not reach tolerance; carries the last residual."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InconsistentCutsetError(InvalidInputError):
    """An empty cutset appears while deeper cutsets are populated."""


class ConfigError(HierpercError):
    """An experiment configuration is invalid."""


class PartialFailureError(HierpercError):
    """Too many replicas of an experiment failed (threshold exceeded)."""
