"""Exception types shared by the readers and the analyses."""
from __future__ import annotations


class PrioError(Exception):
    """Base class for all package errors."""


class ParseError(PrioError, ValueError):
    """Malformed input document. ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ValidationError(PrioError, ValueError):
    """Well-formed input that violates a domain constraint."""
