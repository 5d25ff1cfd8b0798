import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qosc.coherent import (
    CoherentState,
    coefficient_eigen_residual,
    coherent_coefficients,
    coherent_grid_closed,
    coherent_grid_series,
    eigen_residual,
    generating_function_residual,
    in_convergence_region,
    normalization,
    overlap,
    overlap_series,
)
from qosc.errors import OutsideConvergenceRegion
from qosc.qseries import Lattice, QParams

from . import frozen

ALPHAS = [0.1, 0.3, 0.1j]


def test_normalization_frozen():
    assert normalization(0.3, 0.5) == pytest.approx(frozen.COHERENT_NORM_03, rel=1e-14)
    assert normalization(0.0, 0.5) == 1.0


@pytest.mark.parametrize("params", [QParams(0.5, 1.0), QParams(0.5, 2.0), QParams(0.9, 0.5)], ids=str)
def test_eigen_relation(params):
    lat = Lattice.auto(params)
    for a in ALPHAS:
        assert eigen_residual(a, lat) < 1e-8
        assert coefficient_eigen_residual(a, params) < 1e-14


@pytest.mark.parametrize("params", [QParams(0.5, 1.0), QParams(0.5, 2.0)], ids=str)
def test_series_matches_product_form(params):
    lat = Lattice.auto(params)
    for a in ALPHAS:
        assert in_convergence_region(a, params)
        diff = coherent_grid_series(a, lat) - coherent_grid_closed(a, lat)
        assert diff.norm() < 1e-9


def test_closed_form_refuses_outside_region():
    lat = Lattice.auto(QParams(0.5, 1.0))
    with pytest.raises(OutsideConvergenceRegion):
        coherent_grid_closed(3.0, lat)


def test_state_is_normalized():
    lat = Lattice.auto(QParams(0.5, 1.0))
    state = CoherentState(0.3, lat.params)
    assert state.on(lat).norm() == pytest.approx(1.0, abs=1e-10)
    assert np.sum(np.abs(state.coefficients) ** 2) == pytest.approx(1.0, abs=1e-12)


@given(
    a=st.complex_numbers(max_magnitude=1.0, allow_nan=False),
    b=st.complex_numbers(max_magnitude=1.0, allow_nan=False),
    q=st.floats(0.2, 0.9),
)
@settings(max_examples=60, deadline=None)
def test_overlap_closed_vs_series(a, b, q):
    p = QParams(q, 1.0)
    assert abs(overlap(a, b, p) - overlap_series(a, b, p)) < 1e-10
    assert overlap(a, a, p).real == pytest.approx(1.0, abs=1e-12)
    assert abs(overlap(a, b, p)) <= 1.0 + 1e-12
    if abs(a - b) > 1e-3:
        assert abs(overlap(a, b, p)) < 1.0


def test_coefficients_first_terms():
    c = coherent_coefficients(0.3, QParams(0.5, 1.0), n_max=2)
    f = normalization(0.3, 0.5)
    np.testing.assert_allclose(c, [f, f * 0.3, f * 0.09 / np.sqrt(3.0)], rtol=1e-14)


@given(t=st.floats(-0.4, 0.4), x=st.floats(-1.0, 1.0), mu=st.floats(0.5, 2.0), q=st.floats(0.2, 0.8))
@settings(max_examples=60, deadline=None)
def test_generating_function(t, x, mu, q):
    assert generating_function_residual(t, x, mu, q) < 1e-11


def test_generating_function_refuses_divergent():
    with pytest.raises(OutsideConvergenceRegion):
        generating_function_residual(2.0, 1.0, 1.0, 0.5)
