"""Exception hierarchy shared across the package."""

from __future__ import annotations


class StrategistError(Exception):
    """Base class for every error raised by this package."""


class InvalidInput(StrategistError, ValueError):
    """A value violated the precondition of the operation it was passed to."""


class ParseError(StrategistError, ValueError):
    """Query text does not conform to the PubMed query grammar.

    ``offset`` is a byte offset into the UTF-8 encoding of the input and
    ``expected`` the set of token kinds that would have been accepted there.
    """

    def __init__(self, message: str, offset: int, expected: frozenset[str] | set[str] = frozenset()):
        self.offset = offset
        self.expected = frozenset(expected)
        detail = f"{message} at byte {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(sorted(self.expected))})"
        super().__init__(detail)
