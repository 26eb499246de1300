"""Exception hierarchy shared by the library and the CLI."""


class EndureError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(EndureError, ValueError):
    """Invalid input, configuration or file layout (CLI exit code 2)."""


class ModelError(EndureError):
    """The model cannot produce an answer for valid inputs (CLI exit code 3)."""


class InfeasibleError(ModelError):
    """A requested target lies outside what the physics allows."""


class SizingError(ModelError):
    """Generator fixed-point sizing failed to converge."""


class BracketError(ModelError):
    """A root-finding bracket does not straddle the target."""

    def __init__(self, message: str, low: float, high: float):
        super().__init__(message)
        self.low = low
        self.high = high


class TelemetryError(EndureError):
    """A test log could not be reduced."""


class LogFormatError(TelemetryError, ConfigError):
    """A test log is unreadable or is missing a mapped column."""
