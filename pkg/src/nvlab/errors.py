"""Exception hierarchy shared by the library and the command line."""


class NVLabError(Exception):
    """Base class for all errors raised by nvlab."""


class InputError(NVLabError, ValueError):
    """Malformed or out-of-range input (wrong dimension, zero vector, ...)."""


class SceneFormatError(InputError):
    """A scene file could not be parsed.

    ``line`` is the 1-based line number of the offending line, or ``None``
    when the problem is not tied to a single line.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(InputError):
    """A value parsed fine but violates a documented invariant."""


class PreconditionError(InputError):
    """An operation was called outside its stated domain."""


class ConsistencyError(NVLabError, RuntimeError):
    """An internal cross-check between two independent computations failed."""
