"""Exception hierarchy shared by every module of the package."""


class EnergyFPError(Exception):
    """Base class for all package errors."""


class ValidationError(EnergyFPError, ValueError):
    """An argument violates a documented precondition."""


class TailMassTooLarge(ValidationError):
    pass


class MomentDiverges(ValidationError):
    pass


class GridMismatch(ValidationError):
    pass


class DimensionMismatch(ValidationError):
    pass


class AlphaOutOfRange(ValidationError):
    pass


class OrderNotAdmissible(ValidationError):
    pass


class NonPositiveMean(ValidationError):
    pass


class InsufficientPoints(ValidationError):
    pass


class IncompatiblePrediction(ValidationError):
    pass


class StabilityViolation(EnergyFPError, RuntimeError):
    pass


class NegativeDensityBeyondTolerance(EnergyFPError, RuntimeError):
    pass
