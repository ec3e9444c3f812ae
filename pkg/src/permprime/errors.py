"""Exception hierarchy shared by every module and mapped to CLI exit codes."""


class PermPrimeError(Exception):
    pass


class InputError(PermPrimeError, ValueError):
    """Malformed or out-of-range input."""


class ParseError(InputError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class PreconditionError(InputError):
    """Input is well formed but violates an operation's precondition."""


class ResourceError(PermPrimeError):
    """A materialization or closure would exceed its configured cap."""

    def __init__(self, message: str, required: int | None = None, cap: int | None = None):
        self.required = required
        self.cap = cap
        super().__init__(message)


class ConsistencyError(PermPrimeError, AssertionError):
    """Two independent procedures disagreed; indicates a bug."""
