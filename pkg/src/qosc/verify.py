"""Verification suites: each check yields one VerificationReport."""

from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Any, Callable

import numpy as np

from . import asc, biorational, coherent, oscillator, qfourier
from .qseries import Branch, Lattice, LatticePoint, QParams

SUITES = ("orthogonality", "operators", "coherent", "fourier", "biortho")
ALPHAS = (0.1, 0.3, 0.1j)
KERNEL_TS = (1j, -1j, 0.7, 0.3 + 0.4j)
SEMIGROUP_PAIRS = ((0.5, 0.8), (1j, 1j), (0.3 + 0.4j, -1j), (0.7, 0.0), (-1j, 0.9))
CHARLIER_MU = 2.0


@dataclass
class VerificationReport:
    check: str
    params: dict[str, Any]
    residual: float
    tol: float
    passed: bool = field(init=False)
    ms: float = 0.0

    def __post_init__(self) -> None:
        self.passed = bool(self.residual < self.tol)

    def to_json(self) -> dict[str, Any]:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        d["residual"] = d["residual"] if math.isfinite(d["residual"]) else str(d["residual"])
        return d

    def line(self) -> str:
        flag = "PASS" if self.passed else "FAIL"
        return f"{flag}  {self.check:<34} residual={self.residual:.3e}  tol={self.tol:.1e}  ({self.ms:.0f} ms)"


@dataclass(frozen=True)
class SuiteConfig:
    """Inputs shared by every suite; ``tol`` caps each check's own tolerance."""

    q: float = 0.5
    mu: float = 1.0
    n_max: int = 10
    tol: float | None = None
    K: int | None = None
    seed: int = 42
    mu2: float | None = None
    t1: complex | None = None
    t2: complex | None = None

    @property
    def params(self) -> QParams:
        return QParams(self.q, self.mu)

    @property
    def lattice(self) -> Lattice:
        return Lattice.auto(self.params, self.K)

    def label(self, **extra: Any) -> dict[str, Any]:
        return {"q": self.q, "mu": self.mu, **extra}


def _run(name: str, params: dict[str, Any], tol: float, cap: float | None, fn: Callable[[], float]) -> VerificationReport:
    t0 = time.perf_counter()
    value = float(fn())
    ms = (time.perf_counter() - t0) * 1e3
    return VerificationReport(name, params, value, tol if cap is None else min(tol, cap), ms)


def orthogonality_suite(cfg: SuiteConfig) -> list[VerificationReport]:
    P, L, cap = cfg.params, cfg.lattice, cfg.tol
    pts = [LatticePoint(b, k) for b in Branch for k in range(11)]
    n_top = max(cfg.n_max, 12)
    out = [
        _run("gram_identity", cfg.label(n_max=n_top, K=L.K), 1e-8, cap,
             lambda: np.max(np.abs(asc.gram_matrix(n_top, L) - np.eye(n_top + 1)))),
        _run("dual_evaluation", cfg.label(n_max=30, k_max=10), 1e-10, cap,
             lambda: max(asc.dual_evaluation_residual(n, x, P) for x in pts for n in range(31))),
        _run("reflection", cfg.label(n_max=30, k_max=10), 1e-10, cap,
             lambda: max(asc.reflection_check(n, x, P) for x in pts for n in range(31))),
        _run("measure_jumps", cfg.label(K=L.K), 1e-12, cap, lambda: asc.measure_consistency_residual(L)),
        _run("total_mass", cfg.label(K=L.K), 1e-9, cap, lambda: abs(asc.total_jump_mass(L) - (1.0 + cfg.mu))),
        _run("difference_equation", cfg.label(n_max=10, s_max=10), 1e-9, cap,
             lambda: max(asc.difference_equation_residual(n, s, P) for n in range(11) for s in range(1, 11))),
        _run("pearson", cfg.label(s_max=10), 1e-9, cap, lambda: max(asc.pearson_residual(s, P) for s in range(1, 11))),
        _run("charlier_limit", {"mu": CHARLIER_MU, "q": list(asc.CHARLIER_QS), "n_max": 3, "s_max": 4}, 1e-2, None,
             lambda: asc.charlier_limit_check(3, 4, CHARLIER_MU).residual),
    ]
    return out


def operators_suite(cfg: SuiteConfig) -> list[VerificationReport]:
    L, cap, n_max = cfg.lattice, cfg.tol, cfg.n_max
    lab = cfg.label(n_max=n_max, K=L.K)
    out = [
        _run("lowering_action", lab, 1e-8, cap,
             lambda: max(oscillator.lowering_action_residual(n, L).resolved for n in range(n_max + 1))),
        _run("raising_action", lab, 1e-8, cap,
             lambda: max(oscillator.raising_action_residual(n, L).resolved for n in range(n_max + 1))),
        _run("commutator_grid", lab, 1e-8, cap, lambda: oscillator.commutator_residual("grid", n_max, L)),
        _run("commutator_number", lab, 1e-8, cap, lambda: oscillator.commutator_residual("number", n_max, L)),
        _run("adjointness", {**lab, "seed": cfg.seed}, 1e-8, cap,
             lambda: oscillator.adjointness_residual(n_max, L, seed=cfg.seed)),
        _run("hamiltonian_eigen", lab, 1e-8, cap,
             lambda: max(oscillator.hamiltonian_residual(n, L) for n in range(n_max + 1))),
        _run("hamiltonian_factorization", {**lab, "seed": cfg.seed}, 1e-10, cap,
             lambda: oscillator.factorization_residual(L, seed=cfg.seed)),
    ]
    for fam in "ABCD":
        out.append(_run(f"ladder_family_{fam}", {"q": cfg.q, "family": fam, "seed": cfg.seed}, 1e-9, cap,
                        lambda fam=fam: oscillator.verify_ladder_family(fam, cfg.params, seed=cfg.seed)))
    return out


def coherent_suite(cfg: SuiteConfig) -> list[VerificationReport]:
    P, L, cap = cfg.params, cfg.lattice, cfg.tol
    out = []
    for a in ALPHAS:
        out.append(_run(f"coherent_eigen[{a}]", cfg.label(alpha=str(a), K=L.K), 1e-8, cap,
                        lambda a=a: coherent.eigen_residual(a, L)))
    for a in ALPHAS:
        if coherent.in_convergence_region(a, P):
            out.append(_run(f"coherent_closed_form[{a}]", cfg.label(alpha=str(a)), 1e-9, cap,
                            lambda a=a: (coherent.coherent_grid_series(a, L) - coherent.coherent_grid_closed(a, L)).norm()))
    out.append(_run("coherent_overlap", cfg.label(alphas=[str(a) for a in ALPHAS]), 1e-10, cap,
                    lambda: max(abs(coherent.overlap(a, b, P) - coherent.overlap_series(a, b, P))
                                for a in ALPHAS for b in ALPHAS)))
    return out


def fourier_suite(cfg: SuiteConfig) -> list[VerificationReport]:
    P, L, cap, n_max = cfg.params, cfg.lattice, cfg.tol, cfg.n_max
    small = Lattice(P, 6)
    rng = np.random.default_rng(cfg.seed)
    psi = oscillator.wavefunction_table(n_max, L)
    f = oscillator.GridFunction(L, (rng.standard_normal(n_max + 1) + 1j * rng.standard_normal(n_max + 1)) @ psi)

    def series_vs_closed() -> float:
        s = qfourier.kernel_matrix(1j, small, method="series").entries
        c = qfourier.kernel_matrix(1j, small, method="closed", form="x").entries
        return np.max(np.abs(s - c))

    def symmetry() -> float:
        c = qfourier.kernel_matrix(1j, small, method="closed", form="x").entries
        return np.max(np.abs(c - c.T))

    out = [
        _run("kernel_series_vs_closed", cfg.label(t="i", k_max=6), 1e-8, cap, series_vs_closed),
        _run("kernel_symmetry", cfg.label(t="i", k_max=6), 1e-10, cap, symmetry),
        _run("transform_eigenfunctions", cfg.label(t=[str(t) for t in KERNEL_TS], m_max=n_max, K=L.K), 1e-8, cap,
             lambda: max(qfourier.eigenfunction_residual(t, m, L) for t in KERNEL_TS for m in range(n_max + 1))),
        _run("semigroup", cfg.label(pairs=[[str(a), str(b)] for a, b in SEMIGROUP_PAIRS], K=L.K), 1e-7, cap,
             lambda: max(qfourier.semigroup_residual(a, b, L) for a, b in SEMIGROUP_PAIRS)),
        _run("unitarity", cfg.label(K=L.K), 1e-8, cap, lambda: qfourier.unitarity_residual(L)),
        _run("isometry", cfg.label(n_max=n_max, K=L.K), 1e-8, cap, lambda: qfourier.isometry_residual(L, n_max)),
        _run("fourth_power_round_trip", cfg.label(n_max=n_max, K=L.K, seed=cfg.seed), 1e-7, cap,
             lambda: qfourier.round_trip_residual(f)),
    ]
    return out


def biortho_params(cfg: SuiteConfig) -> biorational.BiorthoParams:
    mu2 = 2.0 * cfg.mu if cfg.mu2 is None else cfg.mu2
    t1 = cfg.t1 if cfg.t1 is not None else (
        cfg.mu * mu2 / cfg.t2 if cfg.t2 is not None else biorational.admissible_t1(cfg.mu, mu2))
    return biorational.BiorthoParams(cfg.q, cfg.mu, mu2, t1, cfg.t2)


def biortho_suite(cfg: SuiteConfig) -> list[VerificationReport]:
    bp = biortho_params(cfg)
    cap = cfg.tol
    lab = {"q": bp.q, "mu1": bp.mu1, "mu2": bp.mu2, "t1": str(bp.t1), "t2": str(bp.t2), "s_max": 6}
    out = [
        _run(f"biorthogonality_{c.value}", lab, 1e-6, cap, lambda c=c: biorational.case_matrix_error(c, bp))
        for c in biorational.WeightCase
    ]
    pts = [LatticePoint(b, k) for b in Branch for k in range(7)]
    out.append(_run("kernel_specialization", cfg.label(t="i", s_max=6), 1e-9, cap,
                    lambda: max(biorational.kernel_factor_residual(1j, x, y, cfg.mu, cfg.q) for x in pts for y in pts)))
    return out


_SUITES: dict[str, Callable[[SuiteConfig], list[VerificationReport]]] = {
    "orthogonality": orthogonality_suite,
    "operators": operators_suite,
    "coherent": coherent_suite,
    "fourier": fourier_suite,
    "biortho": biortho_suite,
}


def run_suite(name: str, cfg: SuiteConfig) -> list[VerificationReport]:
    if name == "all":
        return [r for s in SUITES for r in _SUITES[s](cfg)]
    return _SUITES[name](cfg)
