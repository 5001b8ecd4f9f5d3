"""Exception hierarchy shared across the package."""


class TrajediError(Exception):
    """Base class for all package errors."""


class UsageError(TrajediError, ValueError):
    """A caller violated an operation's precondition."""


class ParseError(TrajediError, ValueError):
    """A data or config file could not be parsed."""

    def __init__(self, message: str, line: int | None = None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"line {line}: "
        elif where:
            where += " "
        super().__init__(f"{where}{message}")


class ConfigError(ParseError):
    """An experiment config key is unknown, malformed, or out of range."""

    def __init__(self, message: str, key: str | None = None, line: int | None = None, path=None):
        self.key = key
        super().__init__(message, line=line, path=path)
