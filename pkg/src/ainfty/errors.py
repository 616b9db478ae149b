"""Exception hierarchy shared by the engine, the file format and the CLI."""


class AinfError(Exception):
    """Base class for all engine errors."""


class ValidationError(AinfError):
    """Malformed data: non-composable tuples, arity above cap, unknown generators."""


class HomMismatchError(ValidationError):
    pass


class PreconditionError(AinfError):
    """An operation was called on inputs violating its mathematical preconditions."""


class TruncationError(AinfError):
    """A computation touched an entry cut off by the truncation window."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key


class CurvedRelationError(AinfError):
    """Input data fails the curved A-infinity relations it is supposed to satisfy."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class SolveError(AinfError):
    """The cyclic-element solver cannot proceed; ``level`` names the offending filtration level."""

    def __init__(self, message, level=None):
        super().__init__(message)
        self.level = level
