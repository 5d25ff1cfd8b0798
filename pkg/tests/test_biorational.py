import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qosc.biorational import (
    BiorthoParams,
    WeightCase,
    admissible_t1,
    bi_norm_sq,
    bi_weight,
    biorthogonality_residual,
    case_matrix_error,
    kernel_factor_residual,
    rational_u,
    rational_v,
    self_duality_residual,
    u_on_lattice,
    y_lattice,
)
from qosc.errors import ConstraintViolated, InvalidParameter
from qosc.qseries import Branch, Lattice, LatticePoint, qpoch_inf

from . import frozen

SETS = [
    BiorthoParams(0.5, 1.0, 2.0, math.sqrt(2.0)),
    BiorthoParams(0.6, 0.5, 3.0, 1.3),
]
POS, NEG = Branch.POS, Branch.NEG


def test_params_validation():
    bp = SETS[1]
    assert bp.t2 == pytest.approx(1.5 / 1.3)
    assert bp.swapped().t1 == bp.t2
    with pytest.raises(ConstraintViolated):
        BiorthoParams(0.5, 1.0, 2.0, 1.0, 1.0)
    with pytest.raises(InvalidParameter):
        BiorthoParams(1.2, 1.0, 2.0, 1.0)
    with pytest.raises(InvalidParameter):
        BiorthoParams(0.5, -1.0, 2.0, 1.0)
    assert admissible_t1(1.0, 2.0) == pytest.approx(math.sqrt(2.0))


def test_u_at_one_is_one():
    bp = SETS[0]
    x = LatticePoint(POS, 0)
    for y in (LatticePoint(POS, 3), LatticePoint(NEG, 2)):
        assert rational_u(x, y, bp) == pytest.approx(1.0)
        assert rational_v(x, y, bp) == pytest.approx(1.0)


@pytest.mark.parametrize("bp", SETS, ids=["set1", "set2"])
def test_lattice_row_matches_scalar(bp):
    ylat = Lattice(bp.y_params, 8)
    for x in (LatticePoint(POS, 4), LatticePoint(NEG, 3)):
        row = u_on_lattice(x, ylat, bp)
        ref = np.array([rational_u(x, y, bp) for y in ylat.points])
        np.testing.assert_allclose(row, ref, rtol=1e-11, atol=1e-12)


def test_norm_frozen_and_positive():
    bp = SETS[0]
    assert bi_norm_sq(LatticePoint(POS, 0), bp) == pytest.approx(frozen.BI_NORM_POS0, rel=1e-13)
    for b in Branch:
        for s in range(7):
            assert bi_norm_sq(LatticePoint(b, s), bp) > 0


def test_pp_weight_at_one():
    bp = SETS[0]
    q, m2, t1, t2 = bp.q, bp.mu2, bp.t1, bp.t2
    expected = (qpoch_inf(q, -q / m2, q=q) / qpoch_inf(t1 / m2, t2 / m2, q=q)).real
    assert bi_weight(LatticePoint(POS, 0), WeightCase.PP, bp) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("bp", SETS, ids=["set1", "set2"])
def test_weights_real_and_same_branch_positive(bp):
    ylat = y_lattice(bp)
    for case in WeightCase:
        w = bi_weight(ylat.values, case, bp)
        assert w.dtype == float and np.all(np.isfinite(w))
    # the mixed-branch weights are signed near y = -mu2; the pure ones are not
    for case in (WeightCase.PP, WeightCase.NN):
        assert np.all(bi_weight(ylat.values, case, bp) > 0)


@pytest.mark.parametrize("bp", SETS, ids=["set1", "set2"])
@pytest.mark.parametrize("case", list(WeightCase), ids=lambda c: c.value)
def test_biorthogonality_matrix(bp, case):
    assert case_matrix_error(case, bp, s_max=6) < 1e-6


def test_biorthogonality_single_pairs():
    bp = SETS[0]
    d0 = (1 - bp.q) * bi_norm_sq(LatticePoint(POS, 0), bp)
    x1, xq = LatticePoint(POS, 0), LatticePoint(POS, 1)
    assert biorthogonality_residual(x1, x1, bp) < 1e-7 * d0
    assert biorthogonality_residual(x1, xq, bp) < 1e-7 * d0
    xn = LatticePoint(NEG, 1)
    scale = (1 - bp.q) * max(bi_norm_sq(xq, bp), bi_norm_sq(xn, bp))
    assert biorthogonality_residual(xq, xn, bp) < 1e-6 * scale


def test_case_selection():
    assert WeightCase.of(LatticePoint(POS, 1), LatticePoint(NEG, 0)) is WeightCase.PN
    assert WeightCase.of(LatticePoint(NEG, 1), LatticePoint(NEG, 0)) is WeightCase.NN


points = st.builds(LatticePoint, st.sampled_from([POS, NEG]), st.integers(0, 6))


@given(x=points, y=points, mu=st.sampled_from([0.5, 1.0, 2.0]))
@settings(max_examples=60, deadline=None)
def test_kernel_specialization(x, y, mu):
    assert kernel_factor_residual(1j, x, y, mu, 0.5) < 1e-9


@given(b=st.sampled_from([POS, NEG]), s=st.integers(0, 6), s2=st.integers(0, 6), mu=st.sampled_from([0.7, 1.5, 3.0]))
@settings(max_examples=60, deadline=None)
def test_self_duality(b, s, s2, mu):
    assert self_duality_residual(LatticePoint(b, s), LatticePoint(b, s2), mu, 0.5) < 1e-10


def test_self_duality_needs_same_branch():
    with pytest.raises(InvalidParameter):
        self_duality_residual(LatticePoint(POS, 1), LatticePoint(NEG, 1), 0.7, 0.5)
