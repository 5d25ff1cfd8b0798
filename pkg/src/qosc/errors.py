"""Exception types raised across the package."""

from __future__ import annotations


class QoscError(Exception):
    """Base class for all package errors."""


class InvalidParameter(QoscError, ValueError):
    """A model parameter lies outside its admissible range."""


class NonConvergent(QoscError, ArithmeticError):
    """A series or product did not reach the requested tolerance."""


class PoleInDenominator(QoscError, ZeroDivisionError):
    """A denominator parameter hits q**(-j) inside the summation range."""


class ZeroArgument(QoscError, ValueError):
    """The explicit form was asked for at x = 0."""


class TruncationTooCoarse(QoscError, ArithmeticError):
    """The lattice is already at its cap but the tail is still too large."""


class LatticeMismatch(QoscError, ValueError):
    """Two grid objects live on different lattices."""


class ConstraintViolated(QoscError, ValueError):
    """Supplied constants break an algebraic constraint of the construction."""


class OutsideConvergenceRegion(QoscError, ValueError):
    """A closed form was requested where its product/series does not converge."""
