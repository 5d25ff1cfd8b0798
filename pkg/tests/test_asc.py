from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qosc.asc import (
    asc_explicit,
    asc_forward,
    asc_recurrence,
    charlier,
    charlier_limit_check,
    charlier_limit_residual,
    difference_equation_residual,
    dual_evaluation_residual,
    explicit_scale,
    gram_matrix,
    jump_mass,
    lowering_formula_residual,
    measure_consistency_residual,
    norm_sq,
    orthogonality_residual,
    orthonormal_table,
    pearson_residual,
    raising_formula_residual,
    reflection_check,
    total_jump_mass,
    weight,
    weight_values,
)
from qosc.errors import ZeroArgument
from qosc.qseries import Branch, Lattice, LatticePoint, QParams

from . import frozen

PARAMS = [QParams(0.5, 1.0), QParams(0.5, 2.0), QParams(0.9, 0.5)]


def u_exact(n, x, q, mu):
    """Recurrence in exact rationals, the independent route."""
    u_prev, u = Fraction(1), (x - 1 + mu) / mu
    if n == 0:
        return u_prev
    for k in range(1, n):
        u_prev, u = u, ((x - (1 - mu) * q**k) * u - (1 - q**k) * u_prev) / (mu * q**k)
    return u


def test_low_degrees():
    p = QParams(0.5, 1.0)
    assert asc_recurrence(0, 0.3, p) == 1.0
    assert asc_recurrence(1, 1.0, p) == 1.0
    assert asc_recurrence(1, 0.7, QParams(0.5, 2.0)) == pytest.approx((0.7 - 1 + 2) / 2)


def test_frozen_values():
    p = QParams(0.5, 2.0)
    for route in (asc_recurrence, asc_explicit):
        assert route(5, LatticePoint("pos", 3), p) == pytest.approx(frozen.U5_Q3_MU2, rel=1e-13)
    assert asc_forward(5, 0.125, p)[5] == pytest.approx(frozen.U5_Q3_MU2, rel=1e-13)
    p = QParams(0.3, 0.7)
    for route in (asc_recurrence, asc_explicit):
        assert route(7, LatticePoint("neg", 2), p) == pytest.approx(frozen.U7_NEG_Q03_MU07, rel=1e-12)


def test_norm_and_weight_values():
    assert norm_sq(3, QParams(0.5, 2.0)) == pytest.approx(0.328125, rel=1e-14)
    p = QParams(0.5, 2.0)
    assert weight(1.0, p) == pytest.approx(frozen.WEIGHT_1_MU2, rel=1e-14)
    assert weight(LatticePoint("neg", 1), p) == pytest.approx(frozen.WEIGHT_NEGQ_MU2, rel=1e-14)
    # the weight vanishes just outside the support
    assert weight(1.0 / 0.5, p) == 0.0


@given(
    n=st.integers(0, 30),
    k=st.integers(0, 25),
    branch=st.sampled_from(list(Branch)),
    case=st.sampled_from([(1, 2, 1, 1), (1, 2, 2, 1), (3, 10, 7, 10)]),
)
@settings(max_examples=120, deadline=None)
def test_lattice_evaluator_matches_exact_rationals(n, k, branch, case):
    qn, qd, mn, md = case
    qf, muf = Fraction(qn, qd), Fraction(mn, md)
    x = qf**k if branch is Branch.POS else -muf * qf**k
    params = QParams(qn / qd, mn / md)
    exact = float(u_exact(n, x, qf, muf))
    got = asc_recurrence(n, LatticePoint(branch, k), params)
    # scale of neighbouring degrees: errors come from the recurrence neighbours
    scale = max(abs(float(u_exact(j, x, qf, muf))) * np.sqrt(norm_sq(n, params) / norm_sq(j, params)) for j in range(n + 1))
    assert abs(got - exact) <= 1e-12 * max(abs(exact), scale)


def test_explicit_needs_nonzero_argument():
    with pytest.raises(ZeroArgument):
        asc_explicit(3, 0.0, QParams(0.5, 1.0))


@pytest.mark.parametrize("params", PARAMS, ids=str)
def test_gram_is_identity(params):
    G = gram_matrix(12, Lattice.auto(params))
    assert np.max(np.abs(G - np.eye(13))) < 1e-8


def test_orthogonality_residual_single_entries():
    p = QParams(0.5, 2.0)
    assert orthogonality_residual(3, 3, p) < 1e-12
    assert orthogonality_residual(2, 5, p) < 1e-12


@pytest.mark.parametrize("params", PARAMS + [QParams(0.3, 0.7)], ids=str)
def test_dual_evaluation_and_reflection(params):
    pts = [LatticePoint(b, k) for b in Branch for k in range(11)]
    assert max(dual_evaluation_residual(n, x, params) for x in pts for n in range(31)) < 1e-10
    assert max(reflection_check(n, x, params) for x in pts for n in range(31)) < 1e-10


@given(n=st.integers(0, 12), x=st.floats(min_value=-2.0, max_value=1.0).filter(lambda v: abs(v) > 1e-3),
       q=st.floats(0.2, 0.8), mu=st.floats(0.3, 3.0))
@settings(max_examples=80, deadline=None)
def test_reflection_off_lattice(n, x, q, mu):
    p = QParams(q, mu)
    # both sides carry rounding of the size of their explicit sums
    scale = explicit_scale(n, x, p) + p.mu**-n * explicit_scale(n, -x / p.mu, p.with_mu(1 / p.mu))
    assert reflection_check(n, x, p) <= 1e-12 * scale


@pytest.mark.parametrize("params", PARAMS, ids=str)
def test_measure_jumps_and_total(params):
    lat = Lattice.auto(params)
    assert measure_consistency_residual(lat) < 1e-12
    assert total_jump_mass(lat) == pytest.approx(1.0 + params.mu, abs=1e-9)


def test_first_jump_closed_form():
    p = QParams(0.5, 1.0)
    # q^0 / (-q mu; q)_inf
    expected = 1.0 / np.prod([1 + 0.5 ** (j + 1) for j in range(80)])
    assert jump_mass(LatticePoint("pos", 0), p) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("params", PARAMS, ids=str)
def test_difference_equation_and_pearson(params):
    assert max(difference_equation_residual(n, s, params) for n in range(11) for s in range(1, 11)) < 1e-9
    assert max(pearson_residual(s, params) for s in range(1, 11)) < 1e-9


@given(n=st.integers(1, 10), k=st.integers(0, 12), branch=st.sampled_from(list(Branch)),
       q=st.floats(0.3, 0.8), mu=st.floats(0.5, 2.5))
@settings(max_examples=60, deadline=None)
def test_difference_differentiation_formulas(n, k, branch, q, mu):
    p = QParams(q, mu)
    x = LatticePoint(branch, k)
    xv = abs(x.at(p))
    low = mu / (q * xv) * (explicit_scale(n, x, p) + explicit_scale(n, LatticePoint(branch, k + 1), p))
    low += abs(1 - q**-n) * explicit_scale(n - 1, x, p)
    assert lowering_formula_residual(n, x, p) <= 1e-12 * low
    up = sum(explicit_scale(n, y, p) for y in (x, x.at(p) / q)) / xv + explicit_scale(n + 1, x, p)
    assert raising_formula_residual(n, x, p) <= 1e-11 * up


def test_orthonormal_table_accepts_any_values():
    p = QParams(0.5, 1.0)
    pts = [0.3, -0.4, 0.125, -0.5]
    t = orthonormal_table(6, pts, p)
    for j, x in enumerate(pts):
        u = asc_forward(6, x, p)
        np.testing.assert_allclose(t[:, j], u / np.sqrt([norm_sq(n, p) for n in range(7)]), rtol=1e-12)


def test_weight_positive_on_lattice():
    lat = Lattice(QParams(0.5, 2.0), 40)
    assert np.all(weight_values(lat.values, lat.params) > 0)


def test_charlier_polynomials():
    assert charlier(0, 4, 2.0) == 1.0
    assert charlier(1, 3, 2.0) == pytest.approx(1 - 3 / 2)
    assert charlier(2, 2, 1.0) == pytest.approx(1 - 4 + 2)


def test_charlier_limit_sequences():
    seq = charlier_limit_residual(2, 3, 2.0, [0.9, 0.99, 0.999])
    assert seq[0] > seq[1] > seq[2]
    check = charlier_limit_check(3, 4, 2.0)
    assert check.monotone and check.final < 1e-2
