"""Exception types shared across the package."""


class RydbeatError(Exception):
    """Base class for all package-specific errors."""


class InvalidInputError(RydbeatError, ValueError):
    """An argument violates a documented precondition."""


class NotFoundError(RydbeatError, LookupError):
    """A state label or series is missing from the catalog/model."""


class InsufficientDataError(RydbeatError, ValueError):
    """Too few data points for the requested fit."""


class InsufficientCoverageError(RydbeatError, ValueError):
    """Trace does not cover enough of the decay to fit a lifetime."""


class InsufficientDecayError(RydbeatError, ValueError):
    """Contrast series does not decay enough to constrain a decay time."""


class DegenerateFitError(RydbeatError, ValueError):
    """Normal matrix is singular; the fit cannot constrain its parameters."""


class DetrendError(RydbeatError, ValueError):
    """Detrending failed (typically because the underlying fit failed)."""


class ParseError(RydbeatError, ValueError):
    """A data or config file could not be parsed."""


class ConfigError(RydbeatError, ValueError):
    """A run configuration is missing or inconsistent."""
