"""Exception types shared across the package."""


class OzonetError(Exception):
    """Base class for all package errors."""


class InsufficientDataError(OzonetError):
    """A window, sample, or overlap is too sparse to compute statistics."""


class DegenerateWindowError(OzonetError):
    """A sensor window has zero variance (flat-lined instrument)."""


class ConfigError(OzonetError):
    """A configuration or input file is malformed."""
