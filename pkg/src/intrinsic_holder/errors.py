"""Exception hierarchy shared by all modules."""


class IntrinsicHolderError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(IntrinsicHolderError, ValueError):
    """Invalid user data (block structures, points, parameters)."""


class NonMonotoneLayers(ValidationError):
    pass


class RankDeficientBlock(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class NonPositiveLambda(ValidationError):
    pass


class FieldIndexOutOfRange(ValidationError, IndexError):
    pass


class IndexOutOfRange(ValidationError, IndexError):
    pass


class NonFinitePoint(ValidationError):
    pass


class IncompleteOracle(IntrinsicHolderError):
    """A derivative was requested that the oracle cannot supply."""


class OrderTooLow(ValidationError):
    pass


class EmptyPlan(ValidationError):
    pass


class AlphaOutOfRange(ValidationError):
    pass


class QuadratureFailure(IntrinsicHolderError):
    pass


class EpsilonOutOfRange(ValidationError):
    pass


class DegenerateAlpha(ValidationError):
    pass


class InvalidQuery(ValidationError):
    pass


class EmptyGrid(ValidationError):
    pass


class DegenerateData(ValidationError):
    pass


class OrderViolation(ValidationError):
    pass


class ConfigParseError(IntrinsicHolderError):
    pass
