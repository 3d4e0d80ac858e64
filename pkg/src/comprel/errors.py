"""Exception hierarchy shared across the package."""


class ComprelError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ComprelError):
    """Malformed files, missing paths, or invalid configuration values."""


class NumericError(ComprelError):
    """Non-finite values or inconsistent numeric state during training."""
