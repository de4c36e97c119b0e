"""Exception hierarchy shared by all dicomo modules."""


class DicomoError(Exception):
    """Base class for all errors raised by this package."""


class SumMismatch(DicomoError):
    """In- and out-degree totals of a bi-degree sequence differ."""

    def __init__(self, sum_in, sum_out):
        super().__init__(f"sum of in-degrees ({sum_in}) != sum of out-degrees ({sum_out})")
        self.sum_in = sum_in
        self.sum_out = sum_out


class RepairBudgetExceeded(DicomoError):
    """The redraw loop could not balance the degree sums within its budget."""


class EmptySequence(DicomoError):
    """Operation requires a sequence with at least one half-edge pair."""


class IndexOutOfRange(DicomoError):
    """A vertex or half-edge index is outside the valid range."""


class DomainError(DicomoError):
    """An argument is outside the mathematical domain of the operation."""


class ZeroMeanDegree(DicomoError):
    """Size biasing is undefined when the mean degree is zero."""


class NotNormalized(DicomoError):
    """A derived pmf misses normalization, typically an inconsistent survival value."""


class CriticalRegime(DicomoError):
    """The expansion rate is too close to 1; limiting constants are undefined there."""


class ZeroNu(DicomoError):
    """The expansion rate is zero."""


class SelfCheckFailed(DicomoError):
    """Two independent computations of the same constant disagree."""


class NoExtinctRuns(DicomoError):
    """Every simulated tree survived; no extinct sample to build a law from."""


class NoSurvivors(DicomoError):
    """No simulated tree was alive at the requested depth."""


class AttemptsExhausted(DicomoError):
    """Rejection sampling failed to produce a simple digraph within the attempt cap."""

    def __init__(self, attempts):
        super().__init__(f"no simple digraph in {attempts} attempts")
        self.attempts = attempts


class StartAlreadyPaired(DicomoError):
    """The requested start half-edge is paired (or fatal) in the given state."""


class InstanceTooLarge(DicomoError):
    """Exhaustive path counting is guarded to small instances."""
