"""Exception types shared across the package."""


class NumericError(ArithmeticError):
    """A computation produced a non-finite intermediate value."""


class ConfigError(ValueError):
    """An experiment configuration is malformed; the message names the field."""
