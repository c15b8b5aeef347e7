"""Exception hierarchy shared by all modules."""


class LogMinkError(Exception):
    """Base class for every error raised by this package."""


class InvalidMeasureError(LogMinkError, ValueError):
    """Malformed measure data (non-positive weight, wrong dimension, ...)."""


class HemisphereError(LogMinkError):
    """The measure (or normal set) is concentrated on a closed hemisphere."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConditionError(LogMinkError):
    """The essential subspace concentration condition fails."""

    def __init__(self, message, verdict=None):
        super().__init__(message)
        self.verdict = verdict


class ResourceGuardError(LogMinkError):
    """An enumeration guard (atom count or dimension) was exceeded."""


class GeometryError(LogMinkError, ValueError):
    """Invalid or degenerate polytope construction."""


class DomainError(LogMinkError, ValueError):
    """A point lies on or outside the domain of the log-functional."""


class ConvergenceError(LogMinkError):
    """An iterative method stopped before meeting its tolerance."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace
