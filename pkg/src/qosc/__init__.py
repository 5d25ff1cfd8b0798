"""Numerics for the q-harmonic oscillator built on Al-Salam-Carlitz polynomials."""

from .errors import (
    ConstraintViolated,
    InvalidParameter,
    LatticeMismatch,
    NonConvergent,
    OutsideConvergenceRegion,
    PoleInDenominator,
    QoscError,
    TruncationTooCoarse,
    ZeroArgument,
)
from .qseries import Branch, Lattice, LatticePoint, QParams, SeriesValue, basic_hyp, jackson_integral
from .oscillator import GridFunction, OperatorMatrix

__version__ = "0.1.0"

__all__ = [
    "Branch",
    "ConstraintViolated",
    "GridFunction",
    "InvalidParameter",
    "Lattice",
    "LatticeMismatch",
    "LatticePoint",
    "NonConvergent",
    "OperatorMatrix",
    "OutsideConvergenceRegion",
    "PoleInDenominator",
    "QParams",
    "QoscError",
    "SeriesValue",
    "TruncationTooCoarse",
    "ZeroArgument",
    "basic_hyp",
    "jackson_integral",
]
