"""Shared exception types."""


class FormatError(ValueError):
    """Raised when an input file violates its format contract."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line


class ContractError(ValueError):
    """Raised when a caller violates an operation's precondition."""


class ConfigError(ValueError):
    """Raised for invalid corpus/run configuration."""
