"""Exception types shared across the package."""


class SimrelError(Exception):
    """Base class for user-facing errors."""


class ValidationError(SimrelError):
    """Well-formed input that violates a documented precondition."""


class FormatError(SimrelError):
    """Malformed input text; carries a 1-based line number when one applies."""

    def __init__(self, message, line=None):
        if line is not None:
            message = "line %d: %s" % (line, message)
        super().__init__(message)
        self.line = line
