"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class FracFrontError(Exception):
    """Base class for every error raised by this package."""


class PoleError(FracFrontError, ValueError):
    """Gamma evaluated at a nonpositive integer."""


class RangeError(FracFrontError, OverflowError):
    """Argument outside the range where a routine can deliver its accuracy."""


class ConvergenceError(FracFrontError, ArithmeticError):
    """A series, quadrature or iteration did not meet its tolerance."""


class DomainError(FracFrontError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class HypothesisNotMet(FracFrontError):
    """A theorem hypothesis does not hold for the supplied data.

    ``which`` names the failing hypothesis, e.g. ``"(2-3)"`` or ``"H4"``.
    """

    def __init__(self, which: str, detail: str = "") -> None:
        self.which = which
        self.detail = detail
        super().__init__(f"hypothesis {which} not met" + (f": {detail}" if detail else ""))


class SolverError(FracFrontError, RuntimeError):
    """Numerical failure inside a PDE solve (singular system, lost front, ...)."""
