"""Exception hierarchy shared by every module."""


class CoherenceError(ValueError):
    """Base class for all validation and construction failures."""


class NotHermitian(CoherenceError):
    pass


class NotUnitTrace(CoherenceError):
    pass


class NotPSD(CoherenceError):
    pass


class NotNormalized(CoherenceError):
    pass


class DimensionMismatch(CoherenceError):
    pass


class NotProbabilityVector(CoherenceError):
    pass


class NotCPTP(CoherenceError):
    pass


class NotNormalForm(CoherenceError):
    pass


class SingularDiagonal(CoherenceError):
    pass


class FactorizationFailure(CoherenceError):
    pass


class DivisionByZeroAmplitude(CoherenceError):
    pass


class RankMismatch(CoherenceError):
    pass


class InvalidIsometry(CoherenceError):
    pass


class DimensionTooLarge(CoherenceError):
    pass
