"""Exception types raised by the library."""


class DomainError(ValueError):
    """An argument lies outside the domain where the operation is defined."""


class SolverError(RuntimeError):
    """A linear solve or root search failed.

    ``condition`` carries the 2-norm condition estimate of the collocation
    matrix when the failure came from an ill-conditioned system.
    """

    def __init__(self, message: str, condition: float | None = None):
        super().__init__(message)
        self.condition = condition


class ConsistencyError(RuntimeError):
    """A computed object violates a property the theory guarantees."""
