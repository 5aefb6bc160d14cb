"""Exception hierarchy shared across the library.

Every error raised on purpose derives from :class:`PrdError`, so callers
(and the command-line driver) can distinguish library failures from bugs.
"""


class PrdError(Exception):
    """Base class for all library errors."""


class EmptyInput(PrdError, ValueError):
    """An estimator received an empty sample."""


class DegenerateScale(PrdError):
    """A scale estimate (MAD) is zero where a positive value is required."""


class ZeroWeightSum(PrdError):
    """All depth weights vanished; the weighted mean is undefined."""


class NoValidResiduals(PrdError):
    """Every projection denominator along a direction fell below threshold."""


class AllDirectionsDegenerate(PrdError):
    """No direction in the supplied set produced any valid residual."""


class NoNonsingularSubset(PrdError):
    """Candidate generation could not find a nonsingular row subset."""


class RankDeficient(PrdError):
    """The design matrix does not have full column rank."""


class UnsupportedDimension(PrdError, ValueError):
    """The operation is only defined for simple regression (p = 2)."""


class EpsilonOutOfRange(PrdError, ValueError):
    """A contamination fraction lies outside its admissible range."""


class RootFindFailure(PrdError):
    """Quantile root finding failed to bracket or converge."""


class UnsupportedDistPair(PrdError, ValueError):
    """No closed-form ratio or influence expression for this pair."""


class DimensionTooLarge(PrdError, ValueError):
    """Breakdown formula precondition 1 <= p < floor(n/2) + 2 violated."""


class MissingDataset(PrdError):
    """A scenario requires an explicit data file and none was supplied."""


class ParseError(PrdError, ValueError):
    """Malformed CSV, config file, or flag value."""
