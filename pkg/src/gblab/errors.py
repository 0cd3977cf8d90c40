"""Exception hierarchy shared by all gblab modules."""


class GblabError(Exception):
    """Base class for all library errors."""


class NoPrimeInRange(GblabError):
    pass


class DegenerateFrequencySet(GblabError):
    """Frequency set contains no non-zero residue."""


class EnumerationCapExceeded(GblabError):
    """An enumerating operation would exceed the configured element cap."""


class GroupMismatch(GblabError):
    """Two pmfs live on different groups."""


class SupportTooLarge(GblabError):
    """Exact-mode expectation would exceed the term budget."""


class InsufficientU2(GblabError):
    """Measured local U2 box value is below the requested threshold."""


class InsufficientU3(GblabError):
    """Measured local U3 box value is below the requested threshold."""


class RadiusSeparationViolated(GblabError):
    """rho0 is not sufficiently larger than rho1 for the inverse step."""


class AlmostLinearityViolated(GblabError):
    """Second differences of the phase exceed the declared bound."""


class ExponentialSumTooSmall(GblabError):
    pass


class NoSmallMultiple(GblabError):
    """No multiplier k <= kmax flattens the bilinear phase."""


class DimensionMismatch(GblabError):
    pass


class ReducibleFrequency(GblabError):
    pass


class ZeroFrequency(GblabError):
    pass


class RankDeficient(GblabError):
    pass


class DimensionCapExceeded(GblabError):
    pass


class NoAdmissibleBasePoint(GblabError):
    pass


class NoCorrelationFound(GblabError):
    """Residual correlates with no quadratic phase above the floor."""


class BudgetExhausted(GblabError):
    """Iteration step budget ran out; carries the trace for inspection."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class UnimplementedStep(GblabError):
    """A pluggable oracle was demanded but not supplied."""
