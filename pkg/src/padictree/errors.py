"""
Exception hierarchy.

Every error raised by the library is a ``ValueError`` so callers (and the CLI)
can catch the whole family with a single ``except ValueError``.
"""

from __future__ import annotations

from typing import Optional


class PadicTreeError(ValueError):
    """Base class for all padictree errors."""


class MalformedLiteral(PadicTreeError):
    pass


class PrimeMismatch(PadicTreeError):
    pass


class NotAUnit(PadicTreeError):
    pass


class InsufficientPrecision(PadicTreeError):
    pass


class NotInBall(PadicTreeError):
    pass


class InvalidDirection(PadicTreeError):
    pass


class NotASetS(PadicTreeError):
    pass


class DegenerateBasis(PadicTreeError):
    pass


class EnumerationCap(PadicTreeError):
    pass


class InvalidAction(PadicTreeError):
    pass


class InvalidIndex(PadicTreeError):
    pass


class MissingCells(PadicTreeError):
    pass


class UnsupportedDimension(PadicTreeError):
    pass


class OutOfDomain(PadicTreeError):
    pass


class DivergentKernel(PadicTreeError):
    pass


class IdentityViolation(PadicTreeError):
    pass


class SchemaError(PadicTreeError):
    """Invalid JSON input; ``field`` names the offending field path."""

    def __init__(self, message: str, field: Optional[str] = None) -> None:
        self.field = field
        if field:
            message = f"{field}: {message}"
        super().__init__(message)


__all__ = [
    "PadicTreeError",
    "MalformedLiteral",
    "PrimeMismatch",
    "NotAUnit",
    "InsufficientPrecision",
    "NotInBall",
    "InvalidDirection",
    "NotASetS",
    "DegenerateBasis",
    "EnumerationCap",
    "InvalidAction",
    "InvalidIndex",
    "MissingCells",
    "UnsupportedDimension",
    "OutOfDomain",
    "DivergentKernel",
    "IdentityViolation",
    "SchemaError",
]
