"""Exception hierarchy shared by every module."""


class EGError(Exception):
    """Base class; carries the CLI exit code."""

    exit_code = 1


class DomainError(EGError, ValueError):
    """Input outside the operation's domain (bad value, shape, or column)."""

    exit_code = 2


class SchemaError(DomainError):
    """Malformed serialized document; ``path`` points at the offending field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class NumericError(EGError, ArithmeticError):
    """A numerical routine failed to converge or produced an undefined value."""

    exit_code = 3

    def __init__(self, message, bracket=None):
        super().__init__(message)
        self.bracket = bracket


class ModelStateError(EGError, RuntimeError):
    """Operation requires a fitted model."""

    exit_code = 3
