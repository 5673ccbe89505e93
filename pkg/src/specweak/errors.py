"""Exception hierarchy shared by all modules."""


class SpecWeakError(Exception):
    """Base class for all errors raised by this package."""


class NonSymmetric(SpecWeakError, ValueError):
    pass


class NonFinite(SpecWeakError, ValueError):
    pass


class DimensionZero(SpecWeakError, ValueError):
    pass


class DimensionMismatch(SpecWeakError, ValueError):
    pass


class TooFewPoints(SpecWeakError, ValueError):
    pass


class EmptyPointSet(SpecWeakError, ValueError):
    pass


class GridTooLarge(SpecWeakError, ValueError):
    pass


class InvalidCount(SpecWeakError, ValueError):
    pass


class DomainViolation(SpecWeakError, ValueError):
    pass


class InvalidIndex(SpecWeakError, ValueError):
    pass


class InvalidLambda(SpecWeakError, ValueError):
    pass


class LandweberContraction(SpecWeakError, ValueError):
    pass


class EmptyGrid(SpecWeakError, ValueError):
    pass


class QualificationExceeded(SpecWeakError, ValueError):
    pass


class QuadratureUnderResolved(SpecWeakError, RuntimeError):
    pass


class InvalidSmoothness(SpecWeakError, ValueError):
    pass


class InvalidInput(SpecWeakError, ValueError):
    pass


class ConfigInvalid(SpecWeakError, ValueError):
    pass


class DegenerateData(SpecWeakError, ValueError):
    pass


class BoundViolation(SpecWeakError, AssertionError):
    """A theoretical upper bound was exceeded by a measured quantity."""
