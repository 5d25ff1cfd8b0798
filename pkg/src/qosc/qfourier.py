"""The q-Fourier kernel, its bilinear generating function, and the transform laws.

The kernel has two closed forms built from a terminating 3phi2: one that
terminates through a positive-branch argument and one that terminates
through a negative-branch argument.  Same-branch pairs admit only one of
them.  Mixed pairs admit both; by default the one with the shorter sum is
used, which is also the better conditioned one.

Full matrices are assembled from the eigenfunction series by default.  On
deep lattices it is both faster (one matrix product) and far more accurate
than the closed form, whose 3phi2 cancels heavily for pairs far apart.
The closed form stays available as the independent route.  At a few
special values of ``t`` (for instance ``t = -1`` with ``mu = 1``) some
closed-form entries become 0/0; those are taken from the series.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .asc import _turning_index, orthonormal_table, weight_values
from .errors import InvalidParameter, LatticeMismatch, OutsideConvergenceRegion, PoleInDenominator
from .oscillator import GridFunction, _measure, inner_product, wavefunction_table
from .qseries import (
    K_MAX,
    Branch,
    Lattice,
    LatticePoint,
    QParams,
    SeriesValue,
    basic_hyp,
    qpoch_inf,
    qpoch_inf_array,
)

SERIES_MARGIN = 40
FORMS = ("short", "x", "y")


@dataclass(frozen=True, eq=False)
class KernelMatrix:
    """``K_t(x, y)`` for x over ``rows`` and y over ``cols``."""

    t: complex
    rows: Lattice
    cols: Lattice
    entries: np.ndarray

    @property
    def lattice(self) -> Lattice:
        return self.rows


def _series_order(values: np.ndarray, params: QParams) -> int:
    return int(math.ceil(float(_turning_index(values, params).max(initial=0.0)))) + SERIES_MARGIN


def kernel_series(
    t: complex, x: LatticePoint, y: LatticePoint, lattice: Lattice | QParams, n_max: int | None = None
) -> SeriesValue:
    """``sum_{n <= n_max} t^n psi_n(x) psi_n(y)``; the bound is the magnitude of the last term."""
    params = lattice.params if isinstance(lattice, Lattice) else lattice
    pts = np.array([x.at(params), y.at(params)])
    n_max = _series_order(pts, params) if n_max is None else n_max
    amp = np.sqrt(weight_values(pts, params) * np.abs(pts))
    p = orthonormal_table(n_max, pts, params) * amp
    terms = complex(t) ** np.arange(n_max + 1) * p[:, 0] * p[:, 1]
    return SeriesValue(complex(terms.sum()), n_max + 1, float(abs(terms[-1])))


def _pick_form(x: LatticePoint, y: LatticePoint, form: str) -> Branch:
    if x.branch is y.branch:
        return x.branch
    if form == "x":
        return x.branch
    if form == "y":
        return y.branch
    if form == "short":
        return x.branch if x.k <= y.k else y.branch
    raise InvalidParameter(f"form must be one of {FORMS}, got {form!r}")


def kernel_closed(t: complex, x: LatticePoint, y: LatticePoint, params: QParams, form: str = "x") -> complex:
    """Closed form of ``K_t(x, y)`` via the terminating 3phi2.

    ``form`` picks the variant for mixed-branch pairs: by the branch of ``x``
    (``"x"``), of ``y`` (``"y"``), or whichever sum is shorter (``"short"``).
    """
    t = complex(t)
    q, mu = params.q, params.mu
    xv, yv = x.at(params), y.at(params)
    if t == 0:
        return complex(math.sqrt(weight_values(np.array([xv]), params)[0] * abs(xv)) * math.sqrt(
            weight_values(np.array([yv]), params)[0] * abs(yv)
        ))
    amp = math.sqrt(float(np.prod(weight_values(np.array([xv, yv]), params))) * abs(xv * yv))
    if _pick_form(x, y, form) is Branch.POS:
        pre = qpoch_inf(t, t, -mu * t, q=q)
        den = qpoch_inf(t * xv, t * yv, q=q)
        up = [1.0 / xv, 1.0 / yv, -q / (mu * t)]
        low = [q / (t * xv), q / (t * yv)]
    else:
        pre = qpoch_inf(t, t, -t / mu, q=q)
        den = qpoch_inf(-t * xv / mu, -t * yv / mu, q=q)
        up = [-mu / xv, -mu / yv, -q * mu / t]
        low = [-q * mu / (t * xv), -q * mu / (t * yv)]
    if den == 0:
        raise PoleInDenominator(f"closed kernel has a vanishing denominator at t={t}, x={xv}, y={yv}")
    phi = basic_hyp(up, low, q, q, tol=params.tol).value
    return amp * pre / den * phi


def _closed_block(t: complex, xs: Lattice, ys: Lattice, form: str) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized closed form; returns the entries and a mask of 0/0 entries."""
    q, mu = xs.q, xs.mu
    xv, yv = xs.values, ys.values
    xk, yk = xs.ks, ys.ks
    xpos, ypos = xs.signs > 0, ys.signs > 0
    X, Y = np.meshgrid(xv, yv, indexing="ij")
    KX, KY = np.meshgrid(xk, yk, indexing="ij")
    PX, PY = np.meshgrid(xpos, ypos, indexing="ij")
    same = PX == PY
    if form == "x":
        use_pos = PX
    elif form == "y":
        use_pos = PY
    elif form == "short":
        use_pos = np.where(same, PX, np.where(KX <= KY, PX, PY))
    else:
        raise InvalidParameter(f"form must be one of {FORMS}, got {form!r}")

    big = 1 << 30
    # termination length through the points lying on the chosen form's branch
    tx = np.where(PX == use_pos, KX, big)
    ty = np.where(PY == use_pos, KY, big)
    m = np.minimum(tx, ty)

    inv_qx = q ** (-KX.astype(float))
    inv_qy = q ** (-KY.astype(float))
    a1 = np.where(use_pos, np.where(PX, inv_qx, 1.0 / X), np.where(PX, -mu / X, inv_qx))
    a2 = np.where(use_pos, np.where(PY, inv_qy, 1.0 / Y), np.where(PY, -mu / Y, inv_qy))
    a3 = np.where(use_pos, -q / (mu * t), -q * mu / t)
    b1 = np.where(use_pos, q / (t * X), -q * mu / (t * X))
    b2 = np.where(use_pos, q / (t * Y), -q * mu / (t * Y))

    amp_x = np.sqrt(weight_values(xv, xs.params) * np.abs(xv))
    amp_y = np.sqrt(weight_values(yv, ys.params) * np.abs(yv))
    pre_pos = qpoch_inf(t, t, -mu * t, q=q)
    pre_neg = qpoch_inf(t, t, -t / mu, q=q)
    dpx, dpy = qpoch_inf_array(t * xv, q), qpoch_inf_array(t * yv, q)
    dnx, dny = qpoch_inf_array(-t * xv / mu, q), qpoch_inf_array(-t * yv / mu, q)
    den = np.where(use_pos, np.outer(dpx, dpy), np.outer(dnx, dny))
    pre = np.where(use_pos, pre_pos, pre_neg)

    flat_m = m.ravel()
    order = np.argsort(-flat_m, kind="stable")
    ms = flat_m[order]
    A1, A2, A3 = a1.ravel()[order], a2.ravel()[order], np.broadcast_to(a3, m.shape).ravel()[order]
    B1, B2 = b1.ravel()[order], b2.ravel()[order]
    total = np.ones(ms.size, dtype=complex)
    term = np.ones(ms.size, dtype=complex)
    bad = np.zeros(ms.size, dtype=bool)
    n_top = int(ms[0]) if ms.size else 0
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        for n in range(n_top):
            active = int(np.searchsorted(-ms, -n, side="left"))  # entries with m > n
            if active == 0:
                break
            qn = q**n
            sl = slice(0, active)
            low = (1.0 - B1[sl] * qn) * (1.0 - B2[sl] * qn)
            bad[sl] |= low == 0
            ratio = (1.0 - A1[sl] * qn) * (1.0 - A2[sl] * qn) * (1.0 - A3[sl] * qn) / ((1.0 - q * qn) * low) * q
            term[sl] = term[sl] * ratio
            total[sl] += term[sl]
        phi = np.empty_like(total)
        phi[order] = total
        bad_phi = np.empty_like(bad)
        bad_phi[order] = bad
        phi = phi.reshape(m.shape)
        entries = np.outer(amp_x, amp_y) * pre / den * phi
    singular = (den == 0) | bad_phi.reshape(m.shape) | ~np.isfinite(entries)
    return entries, singular


def _series_block(t: complex, xs: Lattice, ys: Lattice, mask: np.ndarray | None = None) -> np.ndarray:
    vals = np.concatenate([xs.values, ys.values])
    n_max = _series_order(vals, xs.params)
    px = wavefunction_table(n_max, xs)
    py = px if ys == xs else wavefunction_table(n_max, ys)
    tn = complex(t) ** np.arange(n_max + 1)
    if mask is None:
        return (px.T * tn) @ py
    i, j = np.nonzero(mask)
    out = np.zeros(mask.shape, dtype=complex)
    out[i, j] = np.einsum("n,ni,ni->i", tn, px[:, i], py[:, j])
    return out


def kernel_matrix(
    t: complex, rows: Lattice, cols: Lattice | None = None, method: str = "series", form: str = "short"
) -> KernelMatrix:
    """Assemble ``K_t`` over two lattices sharing ``q`` and ``mu``.

    ``method`` is ``"series"`` or ``"closed"``; ``form`` only matters for the latter.
    """
    cols = rows if cols is None else cols
    if rows.params != cols.params:
        raise LatticeMismatch("kernel rows and columns must share q and mu")
    if method not in ("series", "closed"):
        raise InvalidParameter(f"method must be 'closed' or 'series', got {method!r}")
    if form not in FORMS:
        raise InvalidParameter(f"form must be one of {FORMS}, got {form!r}")
    entries = _cached_entries(complex(t), rows, cols, method, form if method == "closed" else "")
    return KernelMatrix(complex(t), rows, cols, entries)


@functools.lru_cache(maxsize=16)
def _cached_entries(t: complex, rows: Lattice, cols: Lattice, method: str, form: str) -> np.ndarray:
    out = _assemble(t, rows, cols, method, form)
    out.setflags(write=False)
    return out


def _assemble(t: complex, rows: Lattice, cols: Lattice, method: str, form: str) -> np.ndarray:
    if method == "series":
        return _series_block(t, rows, cols)
    if t == 1:
        # completeness: K_1 is the reproducing kernel, i.e. the identity for this measure
        eye = np.zeros((len(rows), len(cols)), dtype=complex)
        ri, ci = rows.embed_indices(Lattice(rows.params, min(rows.K, cols.K))), cols.embed_indices(
            Lattice(rows.params, min(rows.K, cols.K))
        )
        eye[ri, ci] = 1.0 / _measure(rows)[ri]
        return eye
    if t == 0:
        a = wavefunction_table(0, rows)[0]
        b = wavefunction_table(0, cols)[0]
        return np.outer(a, b).astype(complex)
    entries, singular = _closed_block(t, rows, cols, form)
    if singular.any():
        entries[singular] = _series_block(t, rows, cols, singular)[singular]
    return entries


def bilinear_gf_residual(
    t: complex, x: LatticePoint, y: LatticePoint, mu1: float, mu2: float, q: float, n_max: int | None = None
) -> float:
    """``|sum_n u_n^mu1(x) u_n^mu2(y) q^(n(n-1)/2) t^n / (q;q)_n - closed form|``.

    ``x`` lies on the mu1 lattice and ``y`` on the mu2 lattice.  The closed
    form needs a terminating 3phi2; when both points are on the negative
    branch the reflection ``u_n^mu(x) = (-1/mu)^n u_n^(1/mu)(-x/mu)`` maps
    the pair onto positive branches first.
    """
    t = complex(t)
    if max(abs(t / mu1), abs(t / mu2)) >= 1.0:
        raise OutsideConvergenceRegion(f"need max(|t/mu1|, |t/mu2|) < 1, got {max(abs(t / mu1), abs(t / mu2)):.6g}")
    p1, p2 = QParams(q, mu1), QParams(q, mu2)
    xv, yv = x.at(p1), y.at(p2)
    if n_max is None:
        n_max = max(_series_order(np.array([xv]), p1), _series_order(np.array([yv]), p2))
    # u_m u_n q^(n(n-1)/2) / (q;q)_n = p_n(x) p_n(y) / sqrt(mu1 mu2)^n
    px = orthonormal_table(n_max, [xv], p1)[:, 0]
    py = orthonormal_table(n_max, [yv], p2)[:, 0]
    lhs = complex(np.sum((t / math.sqrt(mu1 * mu2)) ** np.arange(n_max + 1) * px * py))
    if x.branch is Branch.NEG and y.branch is Branch.NEG:
        xv, yv, mu1, mu2, t = -xv / mu1, -yv / mu2, 1.0 / mu1, 1.0 / mu2, t / (mu1 * mu2)
    if t == 0:
        return float(abs(lhs - 1.0))
    pre = qpoch_inf(-t, t / mu1, t / mu2, q=q) / qpoch_inf(t * xv / mu1, t * yv / mu2, q=q)
    phi = basic_hyp([1.0 / xv, 1.0 / yv, -q / t], [q * mu1 / (t * xv), q * mu2 / (t * yv)], q, q).value
    return float(abs(lhs - pre * phi))


def _check_same(a: Lattice, b: Lattice) -> None:
    if a.params != b.params:
        raise LatticeMismatch("grid function and output lattice use different parameters")


def transform(
    t: complex, f: GridFunction, out: Lattice | None = None, method: str = "series", form: str = "short"
) -> GridFunction:
    """``g(x) = (1-q)^-1 sum_y q_mass(y) |y|^-1 K_t(x, y) f(y)``, evaluated on ``out``."""
    out = f.lattice if out is None else out
    _check_same(out, f.lattice)
    K = kernel_matrix(t, out, f.lattice, method, form).entries
    return GridFunction(out, K @ (_measure(f.lattice) * f.values))


def integration_lattice(lattice: Lattice, tol: float | None = None) -> Lattice:
    """Deeper lattice for sums over ``y`` whose outputs are read on ``lattice``.

    Kernel entries decay like ``q^(|k - k'|/2)``, so summing over ``y`` only
    up to the output depth drops terms of order one at the deepest output
    rows.  The extra depth makes the dropped part ``q^extra``-small.
    """
    tol = lattice.params.tol if tol is None else tol
    extra = int(math.ceil(math.log(tol) / math.log(lattice.q)))
    return Lattice(lattice.params, min(lattice.K + extra, K_MAX))


def semigroup_residual(
    t: complex, t_prime: complex, lattice: Lattice, integration: Lattice | None = None, form: str = "short"
) -> float:
    """Max entry of ``K_t W K_t' - K_{t t'}`` on ``lattice``, integrating over a deeper lattice."""
    Y = integration_lattice(lattice) if integration is None else integration
    A = kernel_matrix(t, lattice, Y, form=form).entries
    B = kernel_matrix(t_prime, lattice, Y, form=form).entries
    C = kernel_matrix(complex(t) * complex(t_prime), lattice, form=form).entries
    return float(np.max(np.abs((A * _measure(Y)) @ B.T - C)))


def unitarity_residual(lattice: Lattice, integration: Lattice | None = None, form: str = "short") -> float:
    """Max entry of ``K_i W K_i^H - D`` where ``D = diag((1-q)|x| / q_mass(x))``."""
    Y = integration_lattice(lattice) if integration is None else integration
    A = kernel_matrix(1j, lattice, Y, form=form).entries
    D = np.diag(1.0 / _measure(lattice))
    return float(np.max(np.abs((A * _measure(Y)) @ A.conj().T - D)))


def eigenfunction_residual(t: complex, m: int, lattice: Lattice, integration: Lattice | None = None) -> float:
    """``||transform(t, psi_m) - t^m psi_m|| / max(1, |t|^m)`` on ``lattice``."""
    Y = integration_lattice(lattice) if integration is None else integration
    psi_in = GridFunction(Y, wavefunction_table(m, Y)[m])
    g = transform(t, psi_in, out=lattice)
    target = GridFunction(lattice, complex(t) ** m * wavefunction_table(m, lattice)[m])
    return (g - target).norm() / max(1.0, abs(complex(t)) ** m)


def isometry_residual(lattice: Lattice, n_max: int = 10, integration: Lattice | None = None) -> float:
    """Max entry of ``<F psi_m, F psi_n> - delta_mn`` for ``F = transform(i, .)``."""
    Y = integration_lattice(lattice) if integration is None else integration
    psi = wavefunction_table(n_max, Y)
    K = kernel_matrix(1j, lattice, Y).entries
    images = [GridFunction(lattice, K @ (_measure(Y) * row)) for row in psi]
    G = np.array([[inner_product(f, g) for g in images] for f in images])
    return float(np.max(np.abs(G - np.eye(n_max + 1))))


def round_trip_residual(f: GridFunction, power: int = 4, t: complex = 1j, integration: Lattice | None = None) -> float:
    """``||T_t^power f - t^power f||`` read on the lattice of ``f``.

    ``f`` is zero-extended to a deeper lattice and every application of
    ``T_t`` integrates over it, so truncation of the ``y`` sum stays below
    the lattice tolerance at the rows where the result is read.
    """
    lat = f.lattice
    if integration is None:
        extra = integration_lattice(lat).K - lat.K
        integration = Lattice(lat.params, min(lat.K + power * extra, K_MAX))
    g = f.extend(integration).values
    K = kernel_matrix(t, integration).entries * _measure(integration)
    for _ in range(power):
        g = K @ g
    g = GridFunction(integration, g).restrict(lat).values
    return float(np.sqrt(np.sum(_measure(lat) * np.abs(g - complex(t) ** power * f.values) ** 2)))
