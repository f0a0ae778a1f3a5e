"""Exception types shared across the package."""


class Tunnel2dError(Exception):
    """Base class for all package errors."""


class DomainError(Tunnel2dError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConvergenceError(Tunnel2dError, RuntimeError):
    """A quadrature or solver did not reach the requested tolerance.

    Carries the best available estimate so callers can decide whether to
    keep going with degraded accuracy.
    """

    def __init__(self, message, best_estimate=None, error_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.error_estimate = error_estimate


class BoundStateProximityError(Tunnel2dError, RuntimeError):
    """The junction matrix is (nearly) singular at a real energy.

    Signals proximity to a bound state; carries an estimate of the
    determinant so scans can treat it as a root candidate.
    """

    def __init__(self, message, det_estimate=None):
        super().__init__(message)
        self.det_estimate = det_estimate


class ConfigError(Tunnel2dError, ValueError):
    """A scenario configuration document failed validation."""

    def __init__(self, message, field=None):
        if field:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field
