import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spartan_st import InvalidParameterError, ModelParams, derived, require_permissible, validate


def test_reference_parameters_are_permissible_and_finite():
    report = validate(ModelParams(d=1, eta0=1.0, eta1=1.0, xi=3.0, mu=0.0, noise_d=1.0))
    assert report.spectrally_positive
    assert report.finite_variance
    assert not report.oscillatory
    assert report.ok


def test_three_dimensions_without_curvature_has_infinite_variance():
    report = validate(ModelParams(d=3, eta0=1.0, eta1=1.0, xi=3.0, mu=0.0, noise_d=1.0))
    assert report.spectrally_positive
    assert not report.finite_variance
    assert any("variance diverges" in m for m in report.messages)


def test_negative_rigidity_with_curvature_oscillates():
    report = validate(ModelParams(d=1, eta0=1.0, eta1=-1.0, xi=3.0, mu=1.0, noise_d=1.0))
    assert report.spectrally_positive
    assert report.oscillatory


@pytest.mark.parametrize("eta1, mu, positive", [
    (1.0, 0.0, True),
    (0.0, 0.0, False),
    (-0.1, 0.0, False),
    (-1.99, 1.0, True),
    (-2.0, 1.0, False),    # double root: pole on the real k axis
    (-2.5, 1.0, False),
    (0.0, 0.5, True),
])
def test_positivity_boundary(eta1, mu, positive):
    report = validate(ModelParams(d=2, eta0=1.0, eta1=eta1, xi=1.0, mu=mu))
    assert report.spectrally_positive is positive


@pytest.mark.parametrize("d, mu, finite", [(1, 0.0, True), (2, 0.0, False), (3, 0.0, False),
                                           (2, 0.1, True), (3, 0.1, True)])
def test_finite_variance_rule(d, mu, finite):
    assert validate(ModelParams(d=d, eta0=1.0, eta1=1.0, xi=1.0, mu=mu)).finite_variance is finite


@pytest.mark.parametrize("field, value", [
    ("eta0", 0.0), ("eta0", -1.0), ("xi", 0.0), ("noise_d", -2.0), ("mu", -0.1),
    ("eta1", math.nan), ("xi", math.inf), ("eta0", "1"),
])
def test_invalid_fields_are_named(field, value):
    kwargs = dict(d=1, eta0=1.0, eta1=1.0, xi=1.0, mu=0.0, noise_d=1.0)
    kwargs[field] = value
    with pytest.raises(InvalidParameterError) as info:
        validate(ModelParams(**kwargs))
    assert info.value.field == field


@pytest.mark.parametrize("d", [0, 4, 1.5, True])
def test_invalid_dimension(d):
    with pytest.raises(InvalidParameterError) as info:
        validate(ModelParams(d=d, eta0=1.0, eta1=1.0, xi=1.0))
    assert info.value.field == "d"


def test_require_permissible_rejects_negative_spectrum():
    with pytest.raises(InvalidParameterError):
        require_permissible(ModelParams(d=1, eta0=1.0, eta1=-1.0, xi=1.0))


@pytest.mark.parametrize("d, eta0, xi, noise_d, dtilde", [
    (1, 1.0, 3.0, 6.0, 1.0),
    (1, 1.0, 3.0, 0.5, 1.0 / 12.0),
    (3, 2.0, 2.0, 32.0, 1.0),
])
def test_combined_diffusion_coefficient(d, eta0, xi, noise_d, dtilde):
    params = ModelParams(d=d, eta0=eta0, eta1=1.0, xi=xi, noise_d=noise_d)
    assert derived(params).dtilde == pytest.approx(dtilde, rel=1e-15)
    assert params.dtilde == pytest.approx(dtilde, rel=1e-15)


def test_beta_coefficients():
    params = ModelParams.from_dtilde(2, 2.0, 0.5, 3.0, 4.0)
    c = derived(params)
    assert c.beta0 == pytest.approx(1.0 / 18.0)
    assert c.beta2 == pytest.approx(0.5 * 9.0 / 18.0)
    assert c.beta1(-2.0) == pytest.approx(4.0 * 2.0 * 0.5 * 9.0)
    assert c.beta1(2.0) == c.beta1(-2.0)


def test_from_dtilde_round_trip():
    params = ModelParams.from_dtilde(3, 2.0, 1.0, 1.5, 0.7, mu=0.2)
    assert params.noise_d == pytest.approx(2.0 * 1.5**3 * 2.0 * 0.7)
    assert params.dtilde == pytest.approx(0.7)
    moved = params.with_(xi=2.0, dtilde=0.7)
    assert moved.xi == 2.0
    assert moved.dtilde == pytest.approx(0.7)
    assert params.with_(mu=0.0).mu == 0.0
    assert params.as_dict()["noise_d"] == params.noise_d


@given(mu=st.floats(1e-3, 10.0), frac=st.floats(-0.999, 3.0))
def test_permissible_quartic_stays_positive(mu, frac):
    eta1 = frac * 2.0 * math.sqrt(mu)
    params = ModelParams(d=1, eta0=1.0, eta1=eta1, xi=1.0, mu=mu)
    assert validate(params).spectrally_positive
    x = np.linspace(0.0, 100.0, 20001)
    assert np.min(1.0 + eta1 * x + mu * x * x) > 0


@given(eta1=st.floats(-5, 5), mu=st.floats(0, 5), d=st.sampled_from([1, 2, 3]))
def test_validate_is_pure(eta1, mu, d):
    params = ModelParams(d=d, eta0=1.0, eta1=eta1, xi=2.0, mu=mu)
    assert validate(params) == validate(params)
