"""Spectral-representation quadrature."""

import math

import numpy as np
import pytest

from spartan_st import (AccuracyError, GaussianDamped, Lag, QuadratureSpec, SingularityError, Tabulated, White,
                        cov_closed_d1, cov_closed_d3, cov_colored_noise, cov_spectral_numeric, spd_static,
                        tail_bound)
from spartan_st.quadrature import radial_prefactor, wynn_epsilon

from conftest import reference
from test_covariance import MU0_ORACLE

TIGHT = QuadratureSpec(rel_tol=1e-11)


@pytest.mark.parametrize("d, r, tau, expected", [row for row in MU0_ORACLE if (row[1], row[2]) != (0.0, 0.0)])
def test_mu0_reference_integrals(d, r, tau, expected):
    assert cov_spectral_numeric(reference(d), Lag(r, tau), TIGHT).value == pytest.approx(expected, rel=1e-10)


@pytest.mark.parametrize("params, lag, expected", [
    (reference(1, mu=1.0, eta1=-1.0), Lag(10.0, 0.0), -0.077642795688924951168),
    (reference(1, mu=1.0, eta1=-1.0), Lag(0.0, 0.0), 0.5),
    (reference(3, mu=1.0, eta1=0.5), Lag(0.0, 0.0), 0.050329212104487035036),
    (reference(2, mu=0.5, eta1=-0.5), Lag(2.0, 0.2), 0.12325879641445269878),
    (reference(1, mu=0.05), Lag(1.0, 0.5), 0.14974723859458164667),
])
def test_curvature_reference_integrals(params, lag, expected):
    value = cov_spectral_numeric(params, lag, TIGHT)
    assert value.value == pytest.approx(expected, rel=1e-10)
    assert value.method == "spectral_quadrature"


def test_closed_form_agreement():
    p1, p3 = reference(1), reference(3)
    for r in (0.0, 3.0, 12.0):
        for tau in (0.0, 1.0, 4.0):
            assert cov_spectral_numeric(p1, Lag(r, tau), TIGHT).value == pytest.approx(
                cov_closed_d1(p1, Lag(r, tau)).value, rel=1e-8)
            lag = Lag(max(r, 0.1), tau)
            assert cov_spectral_numeric(p3, lag, TIGHT).value == pytest.approx(
                cov_closed_d3(p3, lag).value, rel=1e-8)


def test_estimated_error_is_honest():
    p = reference(1)
    for lag in (Lag(3.0, 1.0), Lag(6.0, 2.5), Lag(0.0, 0.0)):
        value = cov_spectral_numeric(p, lag)
        exact = cov_closed_d1(p, lag).value
        assert abs(value.value - exact) <= max(value.est_error, 1e-15)
        assert value.est_error <= 1e-8 * abs(exact)


def test_singular_configurations():
    for d in (2, 3):
        with pytest.raises(SingularityError):
            cov_spectral_numeric(reference(d), Lag(0.0, 0.0))


def test_monotone_in_time_with_curvature():
    p = reference(2, mu=0.4)
    values = [cov_spectral_numeric(p, Lag(1.5, tau)).value for tau in np.linspace(0.0, 3.0, 7)]
    assert all(a > b for a, b in zip(values, values[1:]))


def test_adaptive_scheme_agrees():
    p = reference(1, mu=0.3)
    lag = Lag(4.0, 0.5)
    a = cov_spectral_numeric(p, lag, QuadratureSpec(scheme="adaptive_gk", rel_tol=1e-10)).value
    b = cov_spectral_numeric(p, lag, TIGHT).value
    assert a == pytest.approx(b, rel=1e-8)


def test_fourier_round_trip():
    # inverse-transform C(r, 0) on a fine grid; it must return spd_static
    p = reference(1, mu=0.5)
    r = np.linspace(0.0, 80.0, 1601)
    c = np.array([cov_spectral_numeric(p, Lag(x, 0.0)).value for x in r])
    for k in (0.0, 0.2, 0.5):
        transformed = 2.0 * np.trapezoid(c * np.cos(k * r), r)
        assert transformed == pytest.approx(spd_static(p, k), rel=1e-4)


def test_accuracy_error_carries_partial_value():
    spec = QuadratureSpec(rel_tol=1e-13, max_subdiv=10)
    with pytest.raises(AccuracyError) as info:
        cov_spectral_numeric(reference(2, mu=0.5, eta1=-0.5), Lag(50.0, 0.0), spec)
    assert info.value.partial is not None


def test_white_noise_is_the_plain_integral():
    for p, lag in ((reference(1), Lag(3.0, 1.0)), (reference(3, mu=0.2), Lag(2.0, 0.5))):
        a = cov_colored_noise(p, White(), lag)
        b = cov_spectral_numeric(p, lag)
        assert a.value == b.value
        assert a.method == "colored_noise"


def test_damped_noise_reference_values():
    a = cov_colored_noise(reference(1), GaussianDamped(3.0), Lag(0.0, 0.0), TIGHT).value
    assert a == pytest.approx(0.21379178807790350221, rel=1e-10)
    assert a < 0.5
    b = cov_colored_noise(reference(3, mu=0.2), GaussianDamped(1.0), Lag(2.0, 0.5), TIGHT).value
    assert b == pytest.approx(0.0068659152503319175027, rel=1e-10)


def test_damped_noise_converges_to_white():
    p, lag = reference(1), Lag(3.0, 1.0)
    white = cov_spectral_numeric(p, lag).value
    gaps = [abs(cov_colored_noise(p, GaussianDamped(a), lag).value - white) for a in (1e-1, 1e-2, 1e-3)]
    assert gaps[0] > gaps[1] > gaps[2]
    assert gaps[2] <= 1e-6 * white


def test_damped_noise_regularizes_three_dimensions():
    value = cov_colored_noise(reference(3), GaussianDamped(1.0), Lag(0.0, 0.0))
    assert math.isfinite(value.value) and value.value > 0


def test_tabulated_noise_matches_damped_noise():
    # piecewise-linear interpolation error is O(h^2) ~ 1e-6 for this table
    k = np.linspace(0.0, 4.0, 4001)
    tab = Tabulated(k, np.exp(-(3.0 * k) ** 2))
    a = cov_colored_noise(reference(1), tab, Lag(0.0, 0.0)).value
    assert a == pytest.approx(0.21379178807790350221, rel=1e-5)
    b = cov_colored_noise(reference(1), tab, Lag(2.0, 0.5)).value
    assert b == pytest.approx(cov_colored_noise(reference(1), GaussianDamped(3.0), Lag(2.0, 0.5)).value, rel=1e-5)


def test_tail_bound_properties():
    for p, lag in ((reference(1), Lag(1.0, 0.0)), (reference(3, mu=0.5), Lag(0.0, 0.0)),
                   (reference(2), Lag(1.0, 0.5)), (reference(1, mu=1.0, eta1=-1.0), Lag(0.0, 0.0))):
        bounds = [tail_bound(p, lag, k) for k in (5.0, 10.0, 20.0, 40.0)]
        assert bounds[0] > 0 and all(b >= 0 for b in bounds)   # Gaussian damping may underflow
        assert all(b2 <= 0.5 * b1 for b1, b2 in zip(bounds, bounds[1:]))
    assert tail_bound(reference(3), Lag(1.0, 0.0), 10.0) == math.inf


def test_tail_bound_dominates_the_discarded_mass():
    p = reference(1)
    k_cut = 2.0
    k = np.linspace(k_cut, 2000.0, 400001)
    discarded = radial_prefactor(p) * np.trapezoid(spd_static(p, k), k)
    bound = tail_bound(p, Lag(0.0, 0.0), k_cut)
    assert discarded <= bound <= 1.1 * discarded + 1e-6
    assert bound == pytest.approx(1.0 / (math.pi * 3.0 * k_cut), rel=1e-12)


def test_wynn_epsilon_accelerates_alternating_series():
    partial = np.cumsum([(-1) ** n / (n + 1) for n in range(12)])
    estimate, err = wynn_epsilon(partial)
    assert abs(estimate - math.log(2.0)) < 1e-8
    assert abs(partial[-1] - math.log(2.0)) > 1e-2
    assert abs(estimate - math.log(2.0)) <= 10 * err


@pytest.mark.parametrize("params, lag", [
    (reference(1), Lag(3.0, 1.0)),
    (reference(2, mu=0.5, eta1=-0.5), Lag(2.0, 0.2)),
    (reference(3, mu=1.0, eta1=0.5), Lag(0.0, 0.0)),
    (reference(3, mu=0.1), Lag(5.0, 0.0)),
])
def test_estimated_error_bounds_a_tighter_evaluation(params, lag):
    loose = cov_spectral_numeric(params, lag, QuadratureSpec(rel_tol=1e-7))
    tight = cov_spectral_numeric(params, lag, QuadratureSpec(rel_tol=1e-9))
    assert abs(loose.value - tight.value) < loose.est_error
