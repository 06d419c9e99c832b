"""Exception types shared across the package.

Every error raised deliberately by this package derives from
:class:`GenPoissonError`, so callers can catch one type at the boundary.
Domain violations also subclass ``ValueError`` to stay friendly to code
that only knows the standard hierarchy.
"""


class GenPoissonError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(GenPoissonError, ValueError):
    """An argument lies outside the documented domain.

    The message always names the offending parameter and the violated
    bound, e.g. ``"lambda_ must satisfy lambda_ < 1, got 1.0"``.
    """


class TruncationError(GenPoissonError, RuntimeError):
    """A series could not reach the requested tolerance within its term cap.

    Carries the partial result (when one exists) in :attr:`partial`, so
    diagnostics can report how far the summation got.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class CancellationError(GenPoissonError, RuntimeError):
    """Predicted floating-point cancellation is too severe to proceed.

    Raised before any digits are silently lost, not after.
    """


class RootFindingError(GenPoissonError, RuntimeError):
    """A bracketed root search failed to converge within its iteration cap."""
