"""q-coherent states: eigenvectors of the annihilation operator."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .asc import weight_values
from .errors import OutsideConvergenceRegion
from .oscillator import (
    GridFunction,
    PointwiseResidual,
    _pointwise,
    _row_scale,
    apply_b,
    eigenvalue,
    eigenvalue_factorial,
    wavefunction_table,
)
from .qseries import Lattice, QParams, qpoch_inf, qpoch_inf_array

SERIES_CAP = 400


def normalization(alpha: complex, q: float) -> float:
    """``f_alpha = (-(1-q)|alpha|^2; q)_inf^(-1/2)``."""
    return qpoch_inf(-(1.0 - q) * abs(alpha) ** 2, q=q).real ** -0.5


def _log_amplitude(n: int, alpha: complex, q: float) -> float:
    return n * math.log(abs(alpha)) - 0.5 * math.log(eigenvalue_factorial(n, q))


def truncation_order(alpha: complex, q: float, tol: float) -> int:
    """Smallest n with ``|alpha|^n / sqrt(e_n!) < tol / 100``."""
    if alpha == 0:
        return 0
    target = math.log(tol * 1e-2)
    for n in range(1, SERIES_CAP):
        if _log_amplitude(n, alpha, q) < target:
            return n
    return SERIES_CAP


def coherent_coefficients(alpha: complex, params: QParams, n_max: int | None = None) -> np.ndarray:
    """``c_n = f_alpha alpha^n / sqrt(e_n!)`` for ``n = 0..n_max``."""
    q = params.q
    n_max = truncation_order(alpha, q, params.tol) if n_max is None else n_max
    f = normalization(alpha, q)
    c = np.zeros(n_max + 1, dtype=complex)
    c[0] = f
    if alpha != 0:
        phase = complex(alpha) / abs(alpha)
        for n in range(1, n_max + 1):
            c[n] = f * phase**n * math.exp(_log_amplitude(n, alpha, q))
    return c


@dataclass(frozen=True)
class CoherentState:
    alpha: complex
    params: QParams
    n_max: int | None = None

    @property
    def f_alpha(self) -> float:
        return normalization(self.alpha, self.params.q)

    @cached_property
    def coefficients(self) -> np.ndarray:
        return coherent_coefficients(self.alpha, self.params, self.n_max)

    def on(self, lattice: Lattice) -> GridFunction:
        return coherent_grid_series(self.alpha, lattice, len(self.coefficients) - 1)


def coherent_grid_series(alpha: complex, lattice: Lattice, n_max: int | None = None) -> GridFunction:
    c = coherent_coefficients(alpha, lattice.params, n_max)
    psi = wavefunction_table(len(c) - 1, lattice)
    return GridFunction(lattice, c @ psi)


def closed_form_parameter(alpha: complex, params: QParams) -> complex:
    """``t = alpha sqrt(mu (1-q))``, the generating-function variable."""
    return complex(alpha) * math.sqrt(params.mu * (1.0 - params.q))


def in_convergence_region(alpha: complex, params: QParams) -> bool:
    return abs(alpha) * math.sqrt((1.0 - params.q) / params.mu) * max(1.0, params.mu) < 1.0


def coherent_grid_closed(alpha: complex, lattice: Lattice) -> GridFunction:
    """Product form from the Brenke-type generating function."""
    params = lattice.params
    if not in_convergence_region(alpha, params):
        raise OutsideConvergenceRegion(
            f"|alpha| sqrt((1-q)/mu) max(1,mu) must be < 1 for the product form, alpha={alpha}"
        )
    q, mu = params.q, params.mu
    t = closed_form_parameter(alpha, params)
    x = lattice.values
    amp = np.sqrt(weight_values(x, params) * np.abs(x))
    const = normalization(alpha, q) * qpoch_inf(-t, t / mu, q=q)
    return GridFunction(lattice, const * amp / qpoch_inf_array(x * t / mu, q))


@dataclass(frozen=True)
class EigenCheck:
    norm: float
    pointwise: PointwiseResidual


def eigen_check(alpha: complex, lattice: Lattice, method: str = "series", tol: float = 1e-8) -> EigenCheck:
    state = coherent_grid_series(alpha, lattice) if method == "series" else coherent_grid_closed(alpha, lattice)
    r = (apply_b(state) - alpha * state).values
    scale = _row_scale("b", state.values, lattice) + abs(alpha) * np.abs(state.values)
    pw = _pointwise(r, scale, lattice, tol, drop_last=True)
    return EigenCheck(pw.resolved, pw)


def eigen_residual(alpha: complex, lattice: Lattice, method: str = "series", tol: float = 1e-8) -> float:
    """``||b|alpha> - alpha|alpha>||`` over the resolved interior rows."""
    return eigen_check(alpha, lattice, method, tol).norm


def coefficient_eigen_residual(alpha: complex, params: QParams, n_max: int | None = None) -> float:
    """Max of ``|c_n sqrt(e_n) - alpha c_{n-1}|`` (the eigen-relation in the level basis)."""
    c = coherent_coefficients(alpha, params, n_max)
    e = np.sqrt([eigenvalue(n, params.q) for n in range(len(c))])
    if len(c) < 2:
        return 0.0
    return float(np.max(np.abs(c[1:] * e[1:] - alpha * c[:-1])))


def overlap(alpha: complex, beta: complex, params: QParams) -> complex:
    """Closed-form ``<alpha|beta>``."""
    q = params.q
    num = qpoch_inf(-(1.0 - q) * np.conj(alpha) * beta, q=q)
    return num * normalization(alpha, q) * normalization(beta, q)


def overlap_series(alpha: complex, beta: complex, params: QParams, n_max: int | None = None) -> complex:
    if n_max is None:
        n_max = max(truncation_order(alpha, params.q, params.tol), truncation_order(beta, params.q, params.tol))
    ca = coherent_coefficients(alpha, params, n_max)
    cb = coherent_coefficients(beta, params, n_max)
    return complex(np.sum(np.conj(ca) * cb))


def generating_function_residual(t: complex, x: complex, mu: float, q: float, n_max: int = 400) -> float:
    """``|sum_n u_n(x) q^(n(n-1)/2) t^n / (q;q)_n - (-t, t/mu; q)_inf / (x t/mu; q)_inf|``.

    The left side is summed through ``w_n = q^(n(n-1)/2) u_n``, which obeys
    ``mu w_{n+1} = (x - (1-mu) q^n) w_n - (1 - q^n) q^(n-1) w_{n-1}`` and stays bounded.
    """
    if abs(t * x / mu) >= 1.0:
        raise OutsideConvergenceRegion(f"|t x / mu| must be < 1, got {abs(t * x / mu):.6g}")
    t, x = complex(t), complex(x)
    w_prev, w = complex(0.0), complex(1.0)
    coef = complex(1.0)  # t^n / (q;q)_n
    lhs = w
    for n in range(n_max):
        qn = q**n
        w_prev, w = w, ((x - (1.0 - mu) * qn) * w - ((1.0 - qn) * q ** (n - 1) * w_prev if n else 0.0)) / mu
        coef *= t / (1.0 - q ** (n + 1))
        term = coef * w
        lhs += term
        if n > 5 and abs(term) < 1e-18 * max(1.0, abs(lhs)):
            break
    rhs = qpoch_inf(-t, t / mu, q=q) / qpoch_inf(x * t / mu, q=q)
    return float(abs(lhs - rhs))
