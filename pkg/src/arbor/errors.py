"""Exception types shared across the package."""


class ArborError(Exception):
    """Base class for all arbor-specific errors."""


class ParseError(ArborError):
    """Syntax or semantic error in a group-definition text."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}" if line else message)


class CapacityError(ArborError):
    """An enumeration or filter exceeded its element cap.

    ``reached`` is the element count at the moment the cap was hit.
    """

    def __init__(self, message: str, reached: int = 0, cap: int = 0):
        self.reached = reached
        self.cap = cap
        super().__init__(message)


class InvariantViolation(ArborError):
    """A counting identity or inequality that must hold failed to hold."""


class UnsupportedError(ArborError):
    """The requested operation needs data (e.g. rist metadata) that is absent."""
