"""Exception types shared across the package."""


class AnomalyLabError(Exception):
    """Base class for all package errors."""


class InvalidParameterError(AnomalyLabError, ValueError):
    """A numeric argument violates its documented constraint."""


class AccuracyError(AnomalyLabError, RuntimeError):
    """A quadrature error estimate exceeded the requested tolerance."""


class RegulatorTooSmallError(InvalidParameterError):
    """Regulator below what the position-space kernel can resolve."""


class DegenerateFitError(AnomalyLabError, RuntimeError):
    """Extrapolation fit residual is too large to trust the limit."""
