"""Exception and warning types raised across the package."""


class GrloadError(Exception):
    """Base class for all package errors."""


class DomainError(GrloadError, ValueError):
    """A function was evaluated or configured outside its valid domain."""


class DegenerateFunction(GrloadError, ValueError):
    """All grid samples of a function vanish, so it cannot be normalized."""


class SingularityError(GrloadError):
    """The log-curvature bound is infinite because of a zero or singular point."""


class EtaTooLarge(GrloadError):
    """The curvature bound exceeds 8*pi, outside the clustering guarantee."""


class UnsupportedSingularity(GrloadError):
    """A singular point lies strictly inside the domain."""


class BoundViolation(GrloadError):
    """The endpoint-singularity angle bound does not vanish with block index."""


class DimensionError(GrloadError, ValueError):
    """Two state vectors have different sizes."""


class DivergenceError(GrloadError):
    """Gradient descent blew the loss up; carries the loss trace so far."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class ZeroMassInterval(UserWarning):
    """An interval carried no mass; its splitting angle defaulted to pi/2."""
