"""Al-Salam-Carlitz polynomials: evaluation, weight, norms and structural identities.

Two evaluators are provided.  At a generic argument the three-term recurrence
is run forward.  On the lattice the polynomials are the minimal solution of
the recurrence once ``n`` exceeds roughly twice the depth of the point, so the
forward sweep loses all accuracy there; past that degree lattice points are
evaluated with Miller's backward recurrence on the orthonormal form.  The explicit
2phi1 sum is kept as an independent cross-check.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from .errors import InvalidParameter, ZeroArgument
from .qseries import (
    Branch,
    Lattice,
    LatticePoint,
    QParams,
    basic_hyp,
    jackson_integral,
    qpoch_inf,
    qpoch_inf_array,
    qpochhammer_finite,
)

DEGREE_CAP = 30
MILLER_MARGIN = 40
_RESCALE = 1e8


def _check_degree(n: int) -> int:
    if int(n) != n or n < 0:
        raise InvalidParameter(f"degree must be a nonnegative integer, got {n!r}")
    return int(n)


def norm_sq(n: int, params: QParams) -> float:
    """Squared norm ``d_n^2 = q^(-n(n-1)/2) (q;q)_n / mu^n``."""
    n = _check_degree(n)
    q, mu = params.q, params.mu
    log_d2 = -0.5 * n * (n - 1) * math.log(q) + math.log(qpochhammer_finite(q, q, n).real) - n * math.log(mu)
    return math.exp(log_d2)


def jacobi_coefficients(n_max: int, params: QParams) -> tuple[np.ndarray, np.ndarray]:
    """Diagonal ``a_n`` and off-diagonal ``b_n`` of the orthonormal recurrence.

    ``b_n p_{n+1} + b_{n-1} p_{n-1} = (x - a_n) p_n`` with ``p_n = u_n / d_n``.
    """
    q, mu = params.q, params.mu
    n = np.arange(n_max + 1, dtype=float)
    qn = q**n
    return (1.0 - mu) * qn, np.sqrt(mu * qn * (1.0 - q * qn))


def asc_forward(n_max: int, x: complex, params: QParams) -> np.ndarray:
    """``u_0(x) .. u_{n_max}(x)`` by the forward recurrence."""
    n_max = _check_degree(n_max)
    q, mu = params.q, params.mu
    dtype = complex if isinstance(x, complex) else float
    u = np.zeros(n_max + 1, dtype=dtype)
    u[0] = 1.0
    if n_max >= 1:
        u[1] = (x - 1.0 + mu) / mu
    for n in range(1, n_max):
        qn = q**n
        u[n + 1] = ((x - (1.0 - mu) * qn) * u[n] - (1.0 - qn) * u[n - 1]) / (mu * qn)
    return u


def _turning_index(values: np.ndarray, params: QParams) -> np.ndarray:
    """Degree beyond which ``b_n < |x|/2``, i.e. the polynomial becomes the minimal solution."""
    mags = np.maximum(np.abs(values), 1e-300)
    return 2.0 * np.log(mags / (2.0 * math.sqrt(params.mu))) / math.log(params.q)


def _on_lattice(values: np.ndarray, params: QParams) -> np.ndarray:
    """Mask of values equal to ``q^k`` or ``-mu q^k`` up to rounding."""
    q, mu = params.q, params.mu
    mags = np.where(values > 0, values, -values / mu)
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.log(np.where(mags > 0, mags, np.nan)) / math.log(q)
    kr = np.round(k)
    return np.isfinite(k) & (kr >= 0) & (np.abs(mags - q ** np.where(np.isfinite(kr), kr, 0)) <= 1e-12 * mags)


def _forward_table(n_max: int, x: np.ndarray, params: QParams) -> np.ndarray:
    a, b = jacobi_coefficients(n_max + 1, params)
    p = np.zeros((n_max + 1, x.size))
    p[0] = 1.0
    if n_max >= 1:
        p[1] = (x - a[0]) / b[0]
    with np.errstate(over="ignore", invalid="ignore"):
        for n in range(1, n_max):
            p[n + 1] = ((x - a[n]) * p[n] - b[n - 1] * p[n - 1]) / b[n]
    return p


def _miller_table(n_max: int, x: np.ndarray, params: QParams, start: int) -> np.ndarray:
    """Unnormalized minimal solution, rows ``0..n_max``, by backward recurrence from ``start``.

    Deep in the lattice one step can grow by ``q^(-n/2)``, so each step is
    renormalized and the accumulated log scale of every stored row is folded
    back in at the end.
    """
    a, b = jacobi_coefficients(start + 1, params)
    out = np.zeros((n_max + 1, x.size))
    logs = np.zeros((n_max + 1, x.size))
    acc = np.zeros(x.size)
    p_next = np.zeros(x.size)
    p_cur = np.ones(x.size)
    if start <= n_max:
        out[start] = p_cur
    for n in range(start, 0, -1):
        p_prev = ((x - a[n]) * p_cur - b[n] * p_next) / b[n - 1]
        size = np.maximum(np.abs(p_prev), np.abs(p_cur))
        big = size > _RESCALE
        if big.any():
            p_prev[big] /= size[big]
            p_cur[big] /= size[big]
            acc[big] += np.log(size[big])
        p_next, p_cur = p_cur, p_prev
        if n - 1 <= n_max:
            out[n - 1] = p_cur
            logs[n - 1] = acc
    with np.errstate(under="ignore"):
        return out * np.exp(logs - acc)


def orthonormal_table(n_max: int, values: Sequence[float] | np.ndarray, params: QParams) -> np.ndarray:
    """Orthonormal ``p_n = u_n / d_n`` at lattice values, shape ``(n_max+1, P)``.

    Up to the turning degree of each point the forward recurrence is used; it
    keeps relative accuracy there even where ``p_n`` is tiny.  Past it the
    polynomial is the minimal solution, which Miller's backward recurrence
    delivers; that branch is scaled to match the forward values at the switch.
    """
    n_max = _check_degree(n_max)
    x = np.atleast_1d(np.asarray(values, dtype=float))
    turn = _turning_index(x, params)
    switch = np.clip(np.floor(turn), 0, n_max).astype(int)
    fwd = _forward_table(n_max, x, params)
    # off the lattice the polynomial is not the minimal solution
    todo = (switch < n_max) & _on_lattice(x, params)
    if not todo.any():
        return fwd
    start = max(n_max, int(math.ceil(float(turn.max(initial=0.0))))) + MILLER_MARGIN
    start = min(start, int(600.0 / -math.log10(params.q)))
    mil = _miller_table(n_max, x[todo], params, start)
    cols = np.nonzero(todo)[0]
    out = fwd.copy()
    for j, col in enumerate(cols):
        ns = switch[col]
        idx = [max(ns - 1, 0), ns]
        m, f = mil[idx, j], fwd[idx, col]
        top = np.abs(m).max()
        m = m / top
        scale = np.dot(f, m) / np.dot(m, m)
        out[ns + 1 :, col] = scale * (mil[ns + 1 :, j] / top)
    return out


def lattice_table(n_max: int, lattice: Lattice) -> np.ndarray:
    """Orthonormal polynomials on every point of a lattice."""
    return orthonormal_table(n_max, lattice.values, lattice.params)


def _u_lattice(n: int, point: LatticePoint, params: QParams) -> float:
    p = orthonormal_table(n, [point.at(params)], params)[n, 0]
    return float(p * math.sqrt(norm_sq(n, params)))


def asc_recurrence(n: int, x: complex | LatticePoint, params: QParams) -> complex:
    """``u_n^mu(x;q)`` from the three-term recurrence.

    At lattice points the forward sweep is continued by the backward one
    beyond the turning degree; any other argument runs forward from ``u_0 = 1``.
    """
    n = _check_degree(n)
    if isinstance(x, LatticePoint):
        return _u_lattice(n, x, params)
    return asc_forward(n, x, params)[n]


def asc_explicit(n: int, x: complex | LatticePoint, params: QParams) -> complex:
    """``u_n^mu(x;q)`` from the terminating 2phi1 sum.

    At a negative-branch lattice point the equivalent reflected sum, which
    terminates through ``-mu/x = q**-k``, is used; the direct one relies on
    heavy cancellation there.
    """
    n = _check_degree(n)
    q, mu = params.q, params.mu
    qn = q ** (-n)
    if isinstance(x, LatticePoint):
        qk = q ** (-x.k)
        if x.branch is Branch.POS:
            val = basic_hyp([qn, qk], [0.0], q, -q ** (x.k + 1) / mu, tol=params.tol).value
        else:
            val = (-1.0 / mu) ** n * basic_hyp([qn, qk], [0.0], q, -mu * q ** (x.k + 1), tol=params.tol).value
        return val.real
    if x == 0:
        raise ZeroArgument("the explicit form needs x != 0")
    val = basic_hyp([qn, 1.0 / x], [0.0], q, -q * x / mu, tol=params.tol).value
    return val if isinstance(x, complex) else val.real


def explicit_scale(n: int, x: float | LatticePoint, params: QParams) -> float:
    """Sum of term magnitudes of the explicit sum.

    Both routes lose about ``eps`` times this much, so it is the natural
    denominator for relative comparisons; away from cancellation it equals
    ``|u_n(x)|``.  Off the lattice the positive-branch form is used.
    """
    n = _check_degree(n)
    q, mu = params.q, params.mu
    if not isinstance(x, LatticePoint):
        if x == 0:
            raise ZeroArgument("explicit_scale needs x != 0")
        term, total = 1.0, 1.0
        for j in range(n):
            term *= abs((1.0 - q ** (j - n)) * (1.0 - q**j / x) / (1.0 - q ** (j + 1)) * q * x / mu)
            total += term
        return total
    z = -(q ** (x.k + 1)) / mu if x.branch is Branch.POS else -mu * q ** (x.k + 1)
    term, total = 1.0, 1.0
    for j in range(min(n, x.k)):
        term *= abs((1.0 - q ** (j - n)) * (1.0 - q ** (j - x.k)) / (1.0 - q ** (j + 1)) * z)
        total += term
    return total * (mu**-n if x.branch is Branch.NEG else 1.0)


def dual_evaluation_residual(n: int, x: LatticePoint, params: QParams) -> float:
    """``|recurrence - explicit| / explicit_scale``."""
    return abs(asc_recurrence(n, x, params) - asc_explicit(n, x, params)) / explicit_scale(n, x, params)


def _reflect(x: complex | LatticePoint, params: QParams) -> tuple[complex | LatticePoint, QParams]:
    dual = params.with_mu(1.0 / params.mu)
    if isinstance(x, LatticePoint):
        other = Branch.NEG if x.branch is Branch.POS else Branch.POS
        return LatticePoint(other, x.k), dual
    return -x / params.mu, dual


def reflection_check(n: int, x: complex | LatticePoint, params: QParams) -> float:
    """``|u_n^mu(x) - (-1/mu)^n u_n^(1/mu)(-x/mu)|`` with both sides from the recurrence.

    At lattice points the difference is divided by ``explicit_scale``; the
    polynomials grow like ``q^(-n^2/2)`` so an absolute figure says little.
    """
    n = _check_degree(n)
    if not isinstance(x, LatticePoint) and x == 0:
        raise ZeroArgument("reflection needs x != 0")
    y, dual = _reflect(x, params)
    lhs = asc_recurrence(n, x, params)
    rhs = (-1.0 / params.mu) ** n * asc_recurrence(n, y, dual)
    scale = explicit_scale(n, x, params) if isinstance(x, LatticePoint) else 1.0
    return float(abs(lhs - rhs)) / scale


@dataclass(frozen=True)
class WeightSpec:
    params: QParams
    normalization: float

    @classmethod
    def of(cls, params: QParams) -> "WeightSpec":
        return _weight_spec(params)


@lru_cache(maxsize=256)
def _weight_spec(params: QParams) -> WeightSpec:
    q, mu = params.q, params.mu
    return WeightSpec(params, qpoch_inf(q, -mu, -q / mu, q=q).real)


def weight_values(values: np.ndarray, params: QParams) -> np.ndarray:
    """Vectorized normalized weight ``(qx, -qx/mu; q)_inf / (q, -mu, -q/mu; q)_inf``."""
    q, mu = params.q, params.mu
    x = np.asarray(values, dtype=float)
    num = qpoch_inf_array(q * x, q) * qpoch_inf_array(-q * x / mu, q)
    return num.real / WeightSpec.of(params).normalization


def weight(x: float | LatticePoint, params: QParams) -> float:
    """Normalized orthogonality weight at a point (exactly 0 where a factor vanishes)."""
    if isinstance(x, LatticePoint):
        x = x.at(params)
    return float(weight_values(np.array([x]), params)[0])


def jump_mass(p: LatticePoint, params: QParams) -> float:
    """Jump of the orthogonality measure at a lattice point."""
    q, mu, k = params.q, params.mu, p.k
    if p.branch is Branch.POS:
        den = qpoch_inf(-q * mu, q=q).real * (qpochhammer_finite(q, q, k) * qpochhammer_finite(-q / mu, q, k)).real
        return q**k / den
    den = qpoch_inf(-q / mu, q=q).real * (qpochhammer_finite(q, q, k) * qpochhammer_finite(-q * mu, q, k)).real
    return mu * q**k / den


def measure_consistency_residual(lattice: Lattice) -> float:
    """Largest relative gap between each jump and ``(1+mu) q_mass w / (1-q)``.

    The jumps carry the factor ``1+mu`` that the q-integral form absorbs
    into its normalized weight; without it the jumps would sum to 1.
    """
    params = lattice.params
    jumps = np.array([jump_mass(p, params) for p in lattice.points])
    masses = (1.0 + params.mu) * lattice.q_mass * weight_values(lattice.values, params) / (1.0 - params.q)
    return float(np.max(np.abs(jumps - masses) / jumps))


def total_jump_mass(lattice: Lattice) -> float:
    return float(sum(jump_mass(p, lattice.params) for p in lattice.points))


def gram_matrix(n_max: int, lattice: Lattice) -> np.ndarray:
    """``J(u_m u_n w) / ((1-q) d_m d_n)`` for ``m, n <= n_max``."""
    p = lattice_table(n_max, lattice)
    w = weight_values(lattice.values, lattice.params)
    weighted = p * (lattice.q_mass * w)
    return weighted @ p.T / (1.0 - lattice.q)


def orthogonality_residual(m: int, n: int, params: QParams, lattice: Lattice | None = None) -> float:
    """``|J(u_m u_n w) - (1-q) d_n^2 delta_mn|``."""
    m, n = _check_degree(m), _check_degree(n)
    if max(m, n) > DEGREE_CAP:
        raise InvalidParameter(f"degree must not exceed {DEGREE_CAP}")
    lattice = Lattice.auto(params) if lattice is None else lattice
    p = lattice_table(max(m, n), lattice)
    um = p[m] * math.sqrt(norm_sq(m, params))
    un = p[n] * math.sqrt(norm_sq(n, params))
    w = weight_values(lattice.values, params)
    integral = jackson_integral(um * un * w, lattice)
    target = (1.0 - params.q) * norm_sq(n, params) if m == n else 0.0
    return float(abs(integral - target))


def difference_eigenvalue(n: int, q: float) -> float:
    """``lambda_n = q^(3/2) (q^-n - 1) / (1-q)^2``."""
    return q**1.5 * (q ** (-n) - 1.0) / (1.0 - q) ** 2


def _sigma(s: float, params: QParams) -> float:
    x = params.q**s
    return (1.0 - x) * (params.mu + x)


def difference_equation_residual(n: int, s: int, params: QParams) -> float:
    """Residual of the self-adjoint difference equation at ``x = q**s``.

    Returned relative to the largest of the intermediate terms, which is the
    only scale-free way to compare a difference of differences.
    """
    n = _check_degree(n)
    if int(s) != s or s < 1:
        raise InvalidParameter(f"s must be an integer >= 1, got {s!r}")
    q = params.q
    pts = {j: LatticePoint(Branch.POS, j) for j in (s - 1, s, s + 1)}
    y = {j: asc_recurrence(n, pt, params) for j, pt in pts.items()}
    rho = {j: weight(pt, params) for j, pt in pts.items()}

    def flux(j: int) -> float:
        return _sigma(j, params) * rho[j] * (y[j] - y[j - 1]) / (q**j - q ** (j - 1))

    nabla_x1 = q ** (s + 0.5) - q ** (s - 0.5)
    upper, lower = flux(s + 1) / nabla_x1, flux(s) / nabla_x1
    second = upper - lower
    zeroth = difference_eigenvalue(n, q) * rho[s] * y[s]
    scale = max(abs(upper), abs(lower), abs(second), abs(zeroth))
    if scale == 0.0:
        return 0.0
    return float(abs(second + zeroth) / scale)


def pearson_residual(s: int, params: QParams) -> float:
    """``|Delta(sigma rho)(s) - rho(s) (mu - sigma(s))|`` on the positive branch."""
    if int(s) != s or s < 0:
        raise InvalidParameter(f"s must be a nonnegative integer, got {s!r}")
    rho0 = weight(LatticePoint(Branch.POS, s), params)
    rho1 = weight(LatticePoint(Branch.POS, s + 1), params)
    lhs = _sigma(s + 1, params) * rho1 - _sigma(s, params) * rho0
    return float(abs(lhs - rho0 * (params.mu - _sigma(s, params))))


def _u_at(n: int, x: float | LatticePoint, params: QParams) -> float:
    if n < 0:
        return 0.0
    return asc_recurrence(n, x, params)


def _shift(x: float | LatticePoint, step: int, params: QParams) -> float | LatticePoint:
    """``q**step * x`` keeping lattice points on the lattice whenever possible."""
    if isinstance(x, LatticePoint):
        if x.k + step >= 0:
            return LatticePoint(x.branch, x.k + step)
        return x.at(params) * params.q**step
    return x * params.q**step


def _value(x: float | LatticePoint, params: QParams) -> float:
    return x.at(params) if isinstance(x, LatticePoint) else x


def lowering_formula_residual(n: int, x: float | LatticePoint, params: QParams) -> float:
    """``(mu/(qx)) [u_n(qx) - u_n(x)] - (1 - q^-n) u_{n-1}(x)``, absolute."""
    n = _check_degree(n)
    q, mu = params.q, params.mu
    xv = _value(x, params)
    lhs = mu / (q * xv) * (_u_at(n, _shift(x, 1, params), params) - _u_at(n, x, params))
    rhs = (1.0 - q ** (-n)) * _u_at(n - 1, x, params)
    return float(abs(lhs - rhs))


def raising_formula_residual(n: int, x: float | LatticePoint, params: QParams) -> float:
    """``(1/x) [w(x) u_n(x) - w(x/q) u_n(x/q)] - w(x) u_{n+1}(x)``, absolute."""
    n = _check_degree(n)
    xv = _value(x, params)
    back = _shift(x, -1, params)
    w0, w1 = weight(xv, params), weight(_value(back, params), params)
    lhs = (w0 * _u_at(n, x, params) - (w1 * _u_at(n, back, params) if w1 else 0.0)) / xv
    return float(abs(lhs - w0 * _u_at(n + 1, x, params)))


def charlier(n: int, s: int, mu: float) -> float:
    """Charlier polynomial ``2F0(-n, -s; -; -1/mu)`` as a finite sum."""
    return float(sum(math.comb(n, j) * math.comb(s, j) * math.factorial(j) * (-1.0 / mu) ** j for j in range(min(n, s) + 1)))


def charlier_limit_residual(n: int, s: int, mu: float, q_seq: Sequence[float]) -> list[float]:
    """``|u_n^((1-q)mu)(q^s; q) - c_n^mu(s)|`` for each q in the sequence."""
    n = _check_degree(n)
    target = charlier(n, s, mu)
    out = []
    for q in q_seq:
        params = QParams(q, (1.0 - q) * mu)
        out.append(float(abs(asc_explicit(n, LatticePoint(Branch.POS, s), params) - target)))
    return out


CHARLIER_QS = (0.9, 0.99, 0.999)
EXACT_LEVEL = 1e-10


@dataclass(frozen=True)
class CharlierCheck:
    monotone: bool
    final: float
    sequences: dict[tuple[int, int], list[float]]

    @property
    def residual(self) -> float:
        """Largest final residual, or ``inf`` when some sequence fails to decrease."""
        return self.final if self.monotone else math.inf


def charlier_limit_check(
    n_max: int = 3, s_max: int = 4, mu: float = 2.0, q_seq: Sequence[float] = CHARLIER_QS
) -> CharlierCheck:
    """Residual sequences for ``n <= n_max, s <= s_max``.

    A sequence whose entries all sit below ``EXACT_LEVEL`` is an exact
    agreement at rounding level (for instance ``n = 0`` or ``s = 0``) and
    carries no order information; every other one must strictly decrease.
    """
    seqs = {(n, s): charlier_limit_residual(n, s, mu, q_seq) for n in range(n_max + 1) for s in range(s_max + 1)}
    monotone = True
    for seq in seqs.values():
        if max(seq) < EXACT_LEVEL:
            continue
        monotone &= all(b < a for a, b in zip(seq, seq[1:]))
    return CharlierCheck(monotone, max(seq[-1] for seq in seqs.values()), seqs)
