"""Exception types shared across the package."""


class NCPlaneError(Exception):
    """Base class for all package errors."""


class ValidationError(NCPlaneError):
    """A parameter set or matrix violates a structural constraint."""


class RangeError(NCPlaneError):
    """An evaluation left the numerically stable range."""


class ResolutionError(NCPlaneError):
    """A grid cannot resolve the requested function or operation."""


class ScaleError(NCPlaneError):
    """A requested computation exceeds the configured desk-scale budget."""
