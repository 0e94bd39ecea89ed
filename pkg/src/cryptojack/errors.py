"""Exception types shared across the package."""


class CryptojackError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(CryptojackError):
    """JavaScript source could not be parsed."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class LengthMismatch(CryptojackError, ValueError):
    pass


class DegenerateVariance(CryptojackError, ValueError):
    pass


class InsufficientRows(CryptojackError, ValueError):
    pass


class SchemaMismatch(CryptojackError, ValueError):
    pass


class DegenerateData(CryptojackError, ValueError):
    pass


class MalformedFrame(CryptojackError, ValueError):
    """A payload names a known frame type but its params violate the schema."""


class SessionError(CryptojackError):
    """A mining session failed (connection refused, auth rejected, ...)."""


class ZeroHashRate(CryptojackError, ValueError):
    pass


class ZeroTarget(CryptojackError, ValueError):
    pass


class ProtocolViolation(SessionError):
    """A frame arrived that the session state machine does not allow."""
