"""Exception types shared across the package."""


class LLRERError(Exception):
    """Base class for all library errors."""


class DataError(LLRERError, ValueError):
    """Malformed or unusable input data."""


class ConfigError(LLRERError, ValueError):
    """Invalid configuration or parameter value."""


class CalibrationError(LLRERError, RuntimeError):
    """Censoring calibration could not reach the requested tolerance."""
