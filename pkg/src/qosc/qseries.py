"""q-shifted factorials, basic hypergeometric series and Jackson integration.

Everything here is double precision.  Terminating series are detected by
matching upper parameters against exact powers ``q**-m`` so that lattice
arguments such as ``1/x`` with ``x = q**k`` terminate where they should even
after rounding.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, replace
from functools import cached_property
from typing import Callable, Sequence

import numpy as np

from .errors import InvalidParameter, LatticeMismatch, NonConvergent, PoleInDenominator, TruncationTooCoarse

EPS = float(np.finfo(float).eps)
K_MAX = 4096
K_MARGIN = 10
TERMINATION_SCAN = 512
# a product factor smaller than this (relative to the subtracted term) is a true zero
_ZERO_FACTOR = 8.0 * EPS


@dataclass(frozen=True)
class QParams:
    """Model parameters ``q`` and ``mu`` plus numerical tolerances."""

    q: float
    mu: float
    tol: float = 1e-12
    max_terms: int = 10000

    def __post_init__(self) -> None:
        if not (0.0 < self.q < 1.0):
            raise InvalidParameter(f"q must lie in (0,1), got {self.q!r}")
        if not (self.mu > 0.0) or math.isinf(self.mu):
            raise InvalidParameter(f"mu must be a finite positive number, got {self.mu!r}")
        if not (self.tol > 0.0):
            raise InvalidParameter(f"tol must be positive, got {self.tol!r}")
        if int(self.max_terms) < 1:
            raise InvalidParameter(f"max_terms must be a positive integer, got {self.max_terms!r}")

    def with_mu(self, mu: float) -> "QParams":
        return replace(self, mu=mu)

    def with_tol(self, tol: float) -> "QParams":
        return replace(self, tol=tol)


@dataclass(frozen=True)
class SeriesValue:
    value: complex
    terms_used: int
    truncation_bound: float


class Branch(str, enum.Enum):
    POS = "pos"
    NEG = "neg"

    @property
    def sign(self) -> int:
        return 1 if self is Branch.POS else -1


@dataclass(frozen=True, order=True)
class LatticePoint:
    """Point ``q**k`` (positive branch) or ``-mu*q**k`` (negative branch)."""

    branch: Branch
    k: int

    def __post_init__(self) -> None:
        if not isinstance(self.branch, Branch):
            object.__setattr__(self, "branch", Branch(self.branch))
        if int(self.k) != self.k or self.k < 0:
            raise InvalidParameter(f"lattice index must be a nonnegative integer, got {self.k!r}")
        object.__setattr__(self, "k", int(self.k))

    def value(self, q: float, mu: float) -> float:
        if self.branch is Branch.POS:
            return q**self.k
        return -mu * q**self.k

    def at(self, params: QParams) -> float:
        return self.value(params.q, params.mu)


def truncation_index(params: QParams, tol: float | None = None) -> int:
    """Per-branch cut K so that the dropped geometric tail of masses is below tol."""
    tol = params.tol if tol is None else tol
    K = math.ceil(math.log(tol * (1.0 - params.q)) / math.log(params.q)) + K_MARGIN
    return int(min(max(K, 0), K_MAX))


@dataclass(frozen=True)
class Lattice:
    """The truncated two-branch support with Jackson masses.

    Points are ordered positive branch first (k = 0..K), then the negative
    branch (k = 0..K).
    """

    params: QParams
    K: int

    def __post_init__(self) -> None:
        if int(self.K) != self.K or self.K < 0:
            raise InvalidParameter(f"K must be a nonnegative integer, got {self.K!r}")
        if self.K > K_MAX:
            raise InvalidParameter(f"K must not exceed {K_MAX}, got {self.K}")
        object.__setattr__(self, "K", int(self.K))

    @classmethod
    def auto(cls, params: QParams, K: int | None = None) -> "Lattice":
        return cls(params, truncation_index(params) if K is None else K)

    def __len__(self) -> int:
        return 2 * (self.K + 1)

    @property
    def q(self) -> float:
        return self.params.q

    @property
    def mu(self) -> float:
        return self.params.mu

    @cached_property
    def points(self) -> tuple[LatticePoint, ...]:
        pos = [LatticePoint(Branch.POS, k) for k in range(self.K + 1)]
        neg = [LatticePoint(Branch.NEG, k) for k in range(self.K + 1)]
        return tuple(pos + neg)

    @cached_property
    def ks(self) -> np.ndarray:
        k = np.arange(self.K + 1)
        return np.concatenate([k, k])

    @cached_property
    def signs(self) -> np.ndarray:
        n = self.K + 1
        return np.concatenate([np.ones(n), -np.ones(n)])

    @cached_property
    def values(self) -> np.ndarray:
        powers = self.q ** np.arange(self.K + 1, dtype=float)
        return np.concatenate([powers, -self.mu * powers])

    @cached_property
    def q_mass(self) -> np.ndarray:
        powers = self.q ** np.arange(self.K + 1, dtype=float)
        return (1.0 - self.q) * np.concatenate([powers, self.mu * powers])

    @property
    def pos(self) -> slice:
        return slice(0, self.K + 1)

    @property
    def neg(self) -> slice:
        return slice(self.K + 1, 2 * (self.K + 1))

    def index(self, point: LatticePoint) -> int:
        if point.k > self.K:
            raise IndexError(f"point {point} lies beyond K={self.K}")
        return point.k if point.branch is Branch.POS else self.K + 1 + point.k

    def extended(self, K: int) -> "Lattice":
        return Lattice(self.params, K)

    def embed_indices(self, sub: "Lattice") -> np.ndarray:
        """Positions of the points of a shallower lattice inside this one."""
        if sub.params != self.params or sub.K > self.K:
            raise InvalidParameter("sub-lattice must share parameters and have K <= this K")
        k = np.arange(sub.K + 1)
        return np.concatenate([k, self.K + 1 + k])


def _termination_index(a: complex, q: float, tol: float) -> int | None:
    """Smallest m <= TERMINATION_SCAN with a == q**-m within tol (relative)."""
    a = complex(a)
    mag = abs(a)
    if mag < 0.5:
        return None
    m = int(round(math.log(mag) / -math.log(q)))
    for cand in (m - 1, m, m + 1):
        if 0 <= cand <= TERMINATION_SCAN:
            target = q ** (-cand)
            if abs(a - target) < tol * target:
                return cand
    return None


def _snap(factor: complex, subtracted: complex) -> complex:
    if abs(factor) <= _ZERO_FACTOR * max(1.0, abs(subtracted)):
        return 0.0
    return factor


def qpochhammer_finite(a: complex, q: float, n: int) -> complex:
    """``(a;q)_n``; factors that vanish to rounding are returned as exact zeros."""
    if int(n) != n or n < 0:
        raise InvalidParameter(f"n must be a nonnegative integer, got {n!r}")
    prod = complex(1.0)
    aq = complex(a)
    for _ in range(int(n)):
        prod *= _snap(1.0 - aq, aq)
        aq *= q
    return prod


def qpochhammer_infinite(a: complex, q: float, tol: float = 1e-16, max_terms: int = 10000) -> SeriesValue:
    """``(a;q)_inf`` truncated once ``|a| q**n < tol (1-q)``."""
    if not (abs(q) < 1.0):
        raise InvalidParameter(f"q must satisfy |q| < 1, got {q!r}")
    a = complex(a)
    prod = complex(1.0)
    aq = a
    n = 0
    threshold = tol * (1.0 - abs(q))
    while abs(aq) >= threshold:
        if n >= max_terms:
            raise NonConvergent(f"(a;q)_inf with |a|={abs(a):.3g}, q={q} needs more than {max_terms} factors")
        prod *= _snap(1.0 - aq, aq)
        aq *= q
        n += 1
    return SeriesValue(prod, n, abs(aq) / (1.0 - abs(q)))


def qpoch_inf(*args: complex, q: float) -> complex:
    """Product of several infinite q-shifted factorials, ``(a1,a2,...;q)_inf``."""
    out = complex(1.0)
    for a in args:
        out *= qpochhammer_infinite(a, q).value
    return out


def qpoch_inf_array(a: np.ndarray | complex, q: float, tol: float = 1e-17) -> np.ndarray:
    """Elementwise ``(a;q)_inf`` for an array of arguments."""
    a = np.asarray(a, dtype=complex)
    out = np.ones(a.shape, dtype=complex)
    aq = a.copy()
    threshold = tol * (1.0 - q)
    mag = np.abs(aq)
    while mag.size and mag.max() >= threshold:
        factor = 1.0 - aq
        factor[np.abs(factor) <= _ZERO_FACTOR * np.maximum(1.0, mag)] = 0.0
        out *= factor
        aq *= q
        mag = np.abs(aq)
    return out


def basic_hyp(
    upper: Sequence[complex],
    lower: Sequence[complex],
    q: float,
    z: complex,
    tol: float = 1e-12,
    max_terms: int = 10000,
) -> SeriesValue:
    """Basic hypergeometric series r-phi-s in the Gasper-Rahman convention.

    The n-th term is ``(a;q)_n / (q,b;q)_n * [(-1)^n q^(n(n-1)/2)]^(1+s-r) z^n``.
    An upper parameter within ``tol`` of ``q**-m`` is snapped to it and the
    series stops after ``m+1`` terms.
    """
    ups = [complex(a) for a in upper]
    lows = [complex(b) for b in lower]
    r, s = len(ups), len(lows)
    extra = 1 + s - r
    if not all(cmath.isfinite(v) for v in (*ups, *lows, complex(z))):
        raise InvalidParameter("basic_hyp parameters and argument must be finite")

    stop: int | None = None
    for i, a in enumerate(ups):
        m = _termination_index(a, q, tol)
        if m is not None:
            ups[i] = complex(q ** (-m))
            stop = m if stop is None else min(stop, m)

    if stop is None:
        if r > s + 1:
            raise NonConvergent(f"non-terminating {r}phi{s} diverges")
        if r == s + 1 and abs(z) >= 1.0:
            raise NonConvergent(f"non-terminating {r}phi{s} needs |z| < 1, got |z|={abs(z):.6g}")

    # term n uses the factors (1 - b q^j) for j < n, so only j < stop can bite
    pole_range = TERMINATION_SCAN if stop is None else stop
    for b in lows:
        j = _termination_index(b, q, tol)
        if j is not None and j < pole_range:
            raise PoleInDenominator(f"lower parameter {b} equals q^-{j} inside the summation range")

    term = complex(1.0)
    total = complex(0.0)
    n = 0
    small_run = 0
    while True:
        total += term
        if stop is not None and n == stop:
            return SeriesValue(total, n + 1, 0.0)
        qn = q**n
        num = complex(1.0)
        for a in ups:
            num *= 1.0 - a * qn
        den = 1.0 - q * qn
        for b in lows:
            f = 1.0 - b * qn
            if f == 0.0:
                raise PoleInDenominator(f"lower parameter {b} gives a zero factor at n={n}")
            den *= f
        term = term * num / den * z
        if extra:
            term *= (-qn) ** extra
        n += 1
        if stop is None:
            if abs(term) <= tol * abs(total):
                small_run += 1
                if small_run >= 2:
                    return SeriesValue(total + term, n + 1, abs(term))
            else:
                small_run = 0
        if n >= max_terms:
            raise NonConvergent(f"series not converged after {max_terms} terms")


def _integrand_values(f, lattice: Lattice) -> np.ndarray:
    if callable(f):
        vals = np.asarray(f(lattice.values), dtype=complex)
        return np.broadcast_to(vals, lattice.values.shape)
    if hasattr(f, "lattice") and hasattr(f, "values"):
        if f.lattice != lattice:
            raise LatticeMismatch("integrand lives on a different lattice")
        return np.asarray(f.values, dtype=complex)
    vals = np.asarray(f, dtype=complex)
    if vals.shape != lattice.values.shape:
        raise LatticeMismatch(f"integrand has {vals.size} samples, lattice has {len(lattice)} points")
    return vals


def jackson_integral(f: Callable[[np.ndarray], np.ndarray] | np.ndarray, lattice: Lattice) -> complex:
    """Jackson q-integral over ``[-mu, 1]`` on the truncated lattice.

    ``f`` may be a vectorized callable of the point values, a sample array in
    lattice order, or a grid function carrying its lattice.
    """
    vals = _integrand_values(f, lattice)
    terms = lattice.q_mass * vals
    total = complex(terms.sum())
    last = max(abs(terms[lattice.K]), abs(terms[-1]))
    if lattice.K >= K_MAX and last > lattice.params.tol * abs(total):
        raise TruncationTooCoarse(
            f"last lattice term {last:.3g} exceeds tol*|sum| with K already at K_MAX={K_MAX}"
        )
    return total
