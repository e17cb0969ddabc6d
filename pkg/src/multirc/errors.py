"""Exception types shared across the package."""


class MultircError(Exception):
    """Base class for all package-specific errors."""


class InvalidSpecError(MultircError, ValueError):
    """A task or parameter specification violates its preconditions."""


class DivergenceError(MultircError):
    """An integration produced a non-finite or out-of-bounds state.

    Attributes:
        first_bad_index: index of the first sample at which the state
            left the admissible region (or became non-finite).
    """

    def __init__(self, first_bad_index: int, message: str | None = None):
        self.first_bad_index = int(first_bad_index)
        super().__init__(
            message or f"trajectory diverged at sample index {first_bad_index}"
        )


class RankDeficiencyError(MultircError):
    """The unregularised normal equations are rank deficient."""

    def __init__(self, rank: int, size: int):
        self.rank = rank
        self.size = size
        super().__init__(
            f"normal equations are rank deficient (rank {rank} < size {size}); "
            "a positive ridge regulariser is required"
        )


class NotOnCycleError(MultircError):
    """The supplied state does not return to itself after one period."""

    def __init__(self, residual: float, tolerance: float):
        self.residual = residual
        self.tolerance = tolerance
        super().__init__(
            f"state does not close up after one period: return residual "
            f"{residual:.3e} exceeds tolerance {tolerance:.3e}"
        )


class NetGenerationError(MultircError):
    """Adjacency generation failed repeatedly (degenerate spectral radius)."""


class UndefinedRatioError(MultircError):
    """A norm ratio is undefined because the denominator is zero."""


class ConfigError(MultircError):
    """An experiment configuration file is malformed or out of range."""
