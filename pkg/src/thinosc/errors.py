"""Exception types shared across the package."""


class DomainError(ValueError):
    """An evaluation point lies outside the function's domain."""


class ConfigurationError(ValueError):
    """A spec or configuration file violates a documented constraint."""


class PreconditionError(ValueError):
    """An operation was called with data that violates its precondition."""


class MeshingError(RuntimeError):
    """Mesh generation produced (or would produce) a non-conforming mesh."""


class ResourceLimitError(RuntimeError):
    """A generated object would exceed a configured resource cap."""


class ConvergenceError(RuntimeError):
    """An iterative solver stopped before reaching its tolerance."""

    def __init__(self, message, residual=None, iterations=None):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


class ResolutionError(ValueError):
    """Requested resolution exceeds what the quadrature can resolve."""
