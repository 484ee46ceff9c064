"""Exception types raised by gaussnorm."""


class GaussNormError(Exception):
    pass


class DomainError(GaussNormError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class CapabilityError(GaussNormError):
    """Requested evaluation route is not available for these inputs."""


class ConvergenceError(GaussNormError):
    """Iterative solver hit its cap; ``best`` holds the best iterate found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DetectionError(GaussNormError):
    """A sign-changing bracket for a threshold could not be found."""
