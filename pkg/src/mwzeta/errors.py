"""Exception hierarchy shared by all modules."""


class MWZetaError(Exception):
    """Base class for every error raised by the package."""


class InvalidInput(MWZetaError, ValueError):
    """Bad user input (curve data, field data, flags)."""


class InvalidCurve(InvalidInput):
    pass


class PrecisionExhausted(MWZetaError):
    """A computation needed more p-adic digits than were available."""


class DivisionByNonUnit(MWZetaError, ZeroDivisionError):
    pass


class CenterMismatch(MWZetaError):
    pass


class NonUnitConstantTerm(MWZetaError):
    pass


class BadConstantTerm(MWZetaError):
    pass


class PoleOrderTooLarge(MWZetaError):
    pass


class CoincidentCenters(MWZetaError):
    pass


class IndicialObstruction(MWZetaError):
    pass


class InsufficientAnalyticPrecision(PrecisionExhausted):
    pass


class DimensionMismatch(MWZetaError):
    pass


class GrowthBoundViolation(PrecisionExhausted):
    pass


class SingularDecomposition(PrecisionExhausted):
    pass


class CoefficientOutOfWeilRange(PrecisionExhausted):
    pass


class FieldTooLarge(MWZetaError):
    pass


class InconsistentCounts(MWZetaError):
    pass
