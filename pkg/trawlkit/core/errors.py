# trawlkit/core/errors.py
#
# Exception and warning types raised across trawlkit.
#
# Notes:
# - Every library error derives from TrawlkitError; the CLI maps it to exit 1.
# - DomainError is also a ValueError so numeric callers can catch either.

from typing import Any, List, Optional


class TrawlkitError(Exception):
    """Base class for all errors raised by trawlkit."""


class ConfigurationError(TrawlkitError):
    """Unknown family tag, malformed model string or invalid parameter."""


class DomainError(TrawlkitError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class UnsupportedMomentError(TrawlkitError):
    """A moment was requested from a seed that does not have it (e.g. Cauchy)."""


class AssumptionViolationError(TrawlkitError):
    """Asymptotic theory requested for a model outside its assumptions."""


class DegenerateSeriesError(TrawlkitError):
    """Series with zero sample variance."""


class ParseError(TrawlkitError):
    """Malformed input file; ``line`` is the 1-based physical line number."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class OrderError(TrawlkitError):
    """Timestamps are not strictly increasing."""


class ConvergenceError(TrawlkitError):
    """Optimizer failed after its restart budget; ``trace`` holds each attempt."""

    def __init__(self, message: str, trace: Optional[List[Any]] = None):
        self.trace = trace or []
        super().__init__(message)


class AssumptionViolationWarning(UserWarning):
    """Point estimate returned although its standard error is not available."""


class BoundaryWarning(UserWarning):
    """Optimizer solution sits on the boundary of the parameter box."""
