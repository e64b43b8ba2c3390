"""Exception types shared across the package."""


class QCFieldError(Exception):
    """Base class for package errors."""


class ValidationError(QCFieldError, ValueError):
    """Input violates a documented invariant (bad shapes, norms, ranks...)."""


class ResourceCapError(QCFieldError, RuntimeError):
    """A configured size cap (grid points, tiling nodes) would be exceeded."""
