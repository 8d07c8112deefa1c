"""Exception hierarchy.

Every error raised by the library derives from :class:`PotError`. The CLI maps
the three families below onto exit codes (data 2, numerical 3).
"""

from __future__ import annotations

from typing import Any


class PotError(Exception):
    """Base class for all library errors."""


class DataError(PotError, ValueError):
    """Invalid, empty or unparseable input data."""


class NumericalError(PotError, ArithmeticError):
    """A numerical procedure failed."""


class DomainError(DataError):
    """Argument outside the domain of an operation."""


class InsufficientDataError(DataError):
    """Too few excesses to fit or score a threshold."""

    def __init__(self, message: str, count: int = 0, required: int = 0):
        super().__init__(message)
        self.count = count
        self.required = required


class EmptyExcessError(InsufficientDataError):
    """No observation exceeds the requested threshold."""


class DegenerateDataError(DataError):
    """Data without spread (e.g. all values identical)."""


class FormatError(DataError):
    """An input file could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class EmptyDataError(DataError):
    """An input contained no usable values."""


class ConvergenceError(NumericalError):
    """The optimizer hit its iteration budget; ``best`` holds the last iterate."""

    def __init__(self, message: str, best: Any = None):
        super().__init__(message)
        self.best = best


class DegenerateDensityError(NumericalError):
    """A density estimate has (numerically) no mass on its support."""


class DuplicatePointError(DataError):
    """Training inputs of a Gaussian process coincide."""


class SelectionFailedError(NumericalError):
    """Threshold search produced fewer than two usable evaluations."""

    def __init__(self, message: str, trace: Any = None):
        super().__init__(message)
        self.trace = trace
