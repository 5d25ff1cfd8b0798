"""Self-dual 3phi2 rational functions and their biorthogonality.

``x`` lives on the ``mu1`` lattice and ``y`` on the ``mu2`` lattice.  Each
function terminates through ``x``: ``1/x = q^-s`` on the positive branch and
``-mu1/x = q^-s`` on the negative one.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintViolated, InvalidParameter, PoleInDenominator
from .qseries import Branch, Lattice, LatticePoint, QParams, basic_hyp, qpoch_inf, qpoch_inf_array

POLE_TOL = 1e-12


@dataclass(frozen=True)
class BiorthoParams:
    """Parameters of the pair ``u, v``; ``t2`` defaults to ``mu1 mu2 / t1``."""

    q: float
    mu1: float
    mu2: float
    t1: complex
    t2: complex | None = None
    tol: float = 1e-12

    def __post_init__(self) -> None:
        if not 0.0 < self.q < 1.0:
            raise InvalidParameter(f"q must lie in (0,1), got {self.q}")
        if self.mu1 <= 0 or self.mu2 <= 0:
            raise InvalidParameter(f"mu1 and mu2 must be positive, got {self.mu1}, {self.mu2}")
        if self.t1 == 0:
            raise InvalidParameter("t1 must be nonzero")
        if self.t2 is None:
            object.__setattr__(self, "t2", self.mu1 * self.mu2 / self.t1)
        prod = self.mu1 * self.mu2
        if abs(self.t1 * self.t2 - prod) >= self.tol * prod:
            raise ConstraintViolated(f"need t1 t2 = mu1 mu2 = {prod}, got t1 t2 = {self.t1 * self.t2}")

    @property
    def x_params(self) -> QParams:
        return QParams(self.q, self.mu1, self.tol)

    @property
    def y_params(self) -> QParams:
        return QParams(self.q, self.mu2, self.tol)

    def swapped(self) -> "BiorthoParams":
        return BiorthoParams(self.q, self.mu1, self.mu2, self.t2, self.t1, self.tol)


class WeightCase(str, enum.Enum):
    """Branches of ``(x, x')``; each selects one of the four weights."""

    PP = "pp"
    PN = "pn"
    NP = "np"
    NN = "nn"

    @classmethod
    def of(cls, x: LatticePoint, x_prime: LatticePoint) -> "WeightCase":
        tag = ("p" if x.branch is Branch.POS else "n") + ("p" if x_prime.branch is Branch.POS else "n")
        return cls(tag)


def _parameters(x: LatticePoint, y_val: complex, bp: BiorthoParams) -> tuple[list, list]:
    q, m1, m2, t1, t2 = bp.q, bp.mu1, bp.mu2, complex(bp.t1), complex(bp.t2)
    xv = x.at(bp.x_params)
    if x.branch is Branch.POS:
        return [q ** -x.k, 1.0 / y_val, -q / t1], [q * m1 / (t1 * xv), q * m2 / (t1 * y_val)]
    return [q ** -x.k, -m2 / y_val, -q * t2], [-q * t2 / xv, -q * t2 / y_val]


def rational_u(x: LatticePoint, y: LatticePoint, bp: BiorthoParams) -> complex:
    """``u(x, y)``: the branch-appropriate terminating 3phi2 in ``x``."""
    up, low = _parameters(x, y.at(bp.y_params), bp)
    try:
        return basic_hyp(up, low, bp.q, bp.q, tol=bp.tol).value
    except ZeroDivisionError as exc:
        raise PoleInDenominator(f"u has a pole at x={x}, y={y}") from exc


def rational_v(x: LatticePoint, y: LatticePoint, bp: BiorthoParams) -> complex:
    """``v(x, y)``: ``u`` with ``t1`` and ``t2`` exchanged."""
    return rational_u(x, y, bp.swapped())


def u_on_lattice(x: LatticePoint, ylat: Lattice, bp: BiorthoParams) -> np.ndarray:
    """``u(x, y)`` for every ``y`` on ``ylat``, summed termwise up to the ``x`` termination."""
    q, m2 = bp.q, bp.mu2
    xv = x.at(bp.x_params)
    y = ylat.values.astype(complex)
    t1, t2 = complex(bp.t1), complex(bp.t2)
    # the y-dependent upper parameter is q^-k exactly on the terminating branch
    if x.branch is Branch.POS:
        y_exact = ylat.signs > 0
        a3, b1, b2 = -q / t1, q * bp.mu1 / (t1 * xv), q * m2 / (t1 * y)
    else:
        y_exact = ylat.signs < 0
        a3, b1, b2 = -q * t2, -q * t2 / xv, -q * t2 / y
    a2 = 1.0 / y if x.branch is Branch.POS else -m2 / y
    total = np.ones(y.size, dtype=complex)
    term = np.ones(y.size, dtype=complex)
    for n in range(x.k):
        qn = q**n
        f1 = 1.0 - q ** (n - x.k)
        f2 = np.where(y_exact, 1.0 - q ** (n - ylat.ks.astype(float)), 1.0 - a2 * qn)
        low = (1.0 - b1 * qn) * (1.0 - b2 * qn)
        if np.any(np.abs(low) < POLE_TOL):
            raise PoleInDenominator(f"lower parameter meets q^-{n} at x={x}")
        term = term * f1 * f2 * (1.0 - a3 * qn) / ((1.0 - q * qn) * low) * q
        total = total + term
    return total


def bi_weight(y: LatticePoint | np.ndarray, case: WeightCase | str, bp: BiorthoParams) -> float | np.ndarray:
    """Weight on the ``mu2`` lattice for the branch pair ``case``."""
    case = WeightCase(case)
    q, m2, t1, t2 = bp.q, bp.mu2, complex(bp.t1), complex(bp.t2)
    scalar = isinstance(y, LatticePoint)
    yv = np.atleast_1d(np.asarray(y.at(bp.y_params) if scalar else y, dtype=float))
    num = qpoch_inf_array(q * yv, q) * qpoch_inf_array(-q * yv / m2, q)
    pieces = {
        WeightCase.PP: (t1 * yv / m2, t2 * yv / m2),
        WeightCase.NN: (-yv / t1, -yv / t2),
        WeightCase.PN: (t1 * yv / m2, -yv / t1),
        WeightCase.NP: (-yv / t2, t2 * yv / m2),
    }[case]
    den = qpoch_inf_array(pieces[0], q) * qpoch_inf_array(pieces[1], q)
    w = (num / den).real
    return float(w[0]) if scalar else w


def bi_norm_sq(x: LatticePoint, bp: BiorthoParams) -> float:
    """``d_x^2`` for ``x`` on the ``mu1`` lattice."""
    q, m1, m2, t1, t2 = bp.q, bp.mu1, bp.mu2, complex(bp.t1), complex(bp.t2)
    xv = x.at(bp.x_params)
    top = qpoch_inf(q, q, -m1, -m2, -q / m1, -q / m2, q=q)
    if x.branch is Branch.POS:
        den = qpoch_inf(-t1, -t2, t1 / m1, t2 / m1, t1 / m2, t2 / m2, q=q)
        dep = qpoch_inf(t1 * xv / m1, t2 * xv / m1, q=q)
    else:
        den = qpoch_inf(-1 / t1, -1 / t2, m1 / t1, m1 / t2, m2 / t1, m2 / t2, q=q)
        dep = qpoch_inf(-xv / t1, -xv / t2, q=q)
    val = top / den * dep / qpoch_inf(q * xv, -q * xv / m1, q=q) / abs(xv)
    return float(val.real)


def y_lattice(bp: BiorthoParams, K: int | None = None) -> Lattice:
    return Lattice.auto(bp.y_params, K)


def _pairing(x: LatticePoint, xp: LatticePoint, bp: BiorthoParams, ylat: Lattice) -> complex:
    u = u_on_lattice(x, ylat, bp)
    v = u_on_lattice(xp, ylat, bp.swapped())
    w = bi_weight(ylat.values, WeightCase.of(x, xp), bp)
    return complex(np.sum(u * v * w * ylat.q_mass))


def biorthogonality_residual(
    x: LatticePoint, x_prime: LatticePoint, bp: BiorthoParams, lattice_y: Lattice | None = None
) -> float:
    """``|sum_y u(x,y) v(x',y) w(y) q_mass(y) - (1-q) d_x^2 delta_xx'|``."""
    ylat = y_lattice(bp) if lattice_y is None else lattice_y
    target = (1.0 - bp.q) * bi_norm_sq(x, bp) if x == x_prime else 0.0
    return abs(_pairing(x, x_prime, bp, ylat) - target)


def biorthogonality_matrix(
    xs: list[LatticePoint], xps: list[LatticePoint], bp: BiorthoParams, lattice_y: Lattice | None = None
) -> np.ndarray:
    """``B[i, j] = pairing(xs[i], xps[j]) / ((1-q) d_x^2)``; the identity where the point sets coincide."""
    ylat = y_lattice(bp) if lattice_y is None else lattice_y
    us = {x: u_on_lattice(x, ylat, bp) for x in xs}
    vs = {x: u_on_lattice(x, ylat, bp.swapped()) for x in xps}
    weights = {c: bi_weight(ylat.values, c, bp) * ylat.q_mass for c in WeightCase}
    out = np.zeros((len(xs), len(xps)), dtype=complex)
    for i, x in enumerate(xs):
        norm = (1.0 - bp.q) * bi_norm_sq(x, bp)
        for j, xp in enumerate(xps):
            out[i, j] = np.sum(us[x] * vs[xp] * weights[WeightCase.of(x, xp)]) / norm
    return out


def branch_points(branch: Branch | str, s_max: int) -> list[LatticePoint]:
    return [LatticePoint(Branch(branch), s) for s in range(s_max + 1)]


def case_matrix_error(case: WeightCase | str, bp: BiorthoParams, s_max: int = 6, lattice_y: Lattice | None = None) -> float:
    """Max entry of ``B - I`` over ``s, s' <= s_max`` for one branch pair."""
    case = WeightCase(case)
    bx = Branch.POS if case.value[0] == "p" else Branch.NEG
    bxp = Branch.POS if case.value[1] == "p" else Branch.NEG
    xs, xps = branch_points(bx, s_max), branch_points(bxp, s_max)
    B = biorthogonality_matrix(xs, xps, bp, lattice_y)
    eye = np.array([[1.0 if a == b else 0.0 for b in xps] for a in xs])
    return float(np.max(np.abs(B - eye)))


def kernel_factor_residual(t: complex, x: LatticePoint, y: LatticePoint, mu: float, q: float) -> float:
    """``|u(x, y) - 3phi2 factor of K_t(x, y)|`` with ``mu1 = mu2 = mu`` and ``t1 = mu t``."""
    t = complex(t)
    bp = BiorthoParams(q, mu, mu, mu * t)
    p = bp.x_params
    xv, yv = x.at(p), y.at(p)
    if x.branch is Branch.POS:
        up, low = [1.0 / xv, 1.0 / yv, -q / (mu * t)], [q / (t * xv), q / (t * yv)]
    else:
        up, low = [-mu / xv, -mu / yv, -q * mu / t], [-q * mu / (t * xv), -q * mu / (t * yv)]
    return abs(rational_u(x, y, bp) - basic_hyp(up, low, q, q).value)


def self_duality_residual(x: LatticePoint, y: LatticePoint, mu: float, q: float, t1: complex | None = None) -> float:
    """``|u(x, y) - u(y, x)| / max(1, |u(x, y)|)`` with ``mu1 = mu2 = mu``, for same-branch pairs.

    Mixed pairs evaluate ``u(x, y)`` and ``u(y, x)`` through different 3phi2
    forms, which differ by a ratio of infinite products, so only the
    same-branch symmetry is a pointwise identity.

    The default ``t1 = t2 = -mu`` is the pole-free choice with equal
    parameters when ``mu`` is not an integer power of ``q``.  With
    ``t1 = t2 = mu`` the lower parameter ``q/x`` meets ``q^0`` inside the sum
    for every ``x = q^s`` with ``s >= 1``.
    """
    t1 = -mu if t1 is None else t1
    bp = BiorthoParams(q, mu, mu, t1)
    if x.branch is not y.branch:
        raise InvalidParameter("self-duality compares points on the same branch")
    a = rational_u(x, y, bp)
    return abs(a - rational_u(y, x, bp)) / max(1.0, abs(a))


def admissible_t1(mu1: float, mu2: float) -> float:
    """The symmetric choice ``t1 = t2 = sqrt(mu1 mu2)``."""
    return math.sqrt(mu1 * mu2)
