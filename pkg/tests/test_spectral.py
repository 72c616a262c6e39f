import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from spartan_st import (GaussianDamped, InvalidParameterError, ModelParams, SpectralPoint, Tabulated, White,
                        bochner_scan, ldecay, spd_lagged, spd_spacetime, spd_static, susceptibility_spectral)
from spartan_st.errors import DomainError
from spartan_st.spectral import polynomial

from conftest import reference


def test_ldecay_values():
    p = reference(1)
    assert ldecay(p, 0.0) == p.dtilde
    assert ldecay(p, 1.0 / 3.0) == pytest.approx(2.0 * p.dtilde, rel=1e-15)
    q = ModelParams.from_dtilde(1, 1.0, 1.0, 1.0, 0.4, mu=1.0)
    assert ldecay(q, 2.0) == pytest.approx(21.0 * 0.4, rel=1e-15)


def test_spd_static_values():
    p = reference(1)
    assert spd_static(p, 0.0) == 3.0
    assert spd_static(p, 1.0 / 3.0) == pytest.approx(1.5, rel=1e-15)
    assert spd_static(reference(3), 0.0) == 27.0


def test_spd_lagged_reduces_to_static_and_decays():
    p = reference(2, mu=0.3)
    k = np.linspace(0.0, 3.0, 31)
    assert np.array_equal(spd_lagged(p, k, 0.0), spd_static(p, k))
    assert spd_lagged(p, 0.0, 1.7) == pytest.approx(9.0 * math.exp(-1.7), rel=1e-15)
    assert np.array_equal(spd_lagged(p, k, 0.8), spd_lagged(p, k, -0.8))
    assert np.all(spd_lagged(p, k[:10], 1.0) < spd_lagged(p, k[:10], 0.5))


def test_spacetime_spectrum_values():
    p = reference(1)
    assert spd_spacetime(p, 0.0, 0.0) == pytest.approx(2.0 * 3.0 / 1.0)
    # D = 0.5 with mu = 1 gives D~ = 1/12 and a peak of 2 xi / D~ = 72
    q = ModelParams(d=1, eta0=1.0, eta1=1.0, xi=3.0, mu=1.0, noise_d=0.5)
    assert q.dtilde == pytest.approx(1.0 / 12.0)
    assert spd_spacetime(q, 0.0, 0.0) == pytest.approx(72.0, rel=1e-14)


def test_spacetime_spectrum_is_lorentzian_in_frequency():
    p = reference(3, mu=0.1)
    k, w = 0.7, np.linspace(-5, 5, 11)
    rate = ldecay(p, k)
    expected = spd_static(p, k) * 2.0 * rate / (rate**2 + w**2)
    assert np.allclose(spd_spacetime(p, k, w), expected, rtol=1e-14, atol=0)
    assert np.array_equal(spd_spacetime(p, k, w), spd_spacetime(p, k, -w))


def test_static_times_twice_rate_is_noise_strength():
    p = ModelParams(d=2, eta0=1.3, eta1=0.4, xi=2.0, mu=0.2, noise_d=0.9)
    k = np.linspace(0.0, 10.0, 100)
    np.testing.assert_allclose(spd_static(p, k) * 2.0 * ldecay(p, k), p.noise_d, rtol=4 * np.finfo(float).eps)


def test_susceptibility_values_and_sign():
    p = reference(1, mu=0.5)
    tau = 0.8
    expected = -(2.0 * p.dtilde / p.noise_d) * 3.0 * math.exp(-p.dtilde * tau)
    assert susceptibility_spectral(p, 0.0, tau) == pytest.approx(expected, rel=1e-14)
    k = np.linspace(0.0, 1.0, 51)   # beyond this the mode has decayed below double precision
    assert np.all(susceptibility_spectral(p, k, tau) < 0)


def test_susceptibility_matches_time_derivative():
    p = reference(1, mu=0.5)
    k, tau, h = 0.4, 1.3, 1e-4
    fd = (spd_lagged(p, k, tau + h) - spd_lagged(p, k, tau - h)) / (2 * h)
    assert p.noise_d * susceptibility_spectral(p, k, tau) / 2.0 == pytest.approx(fd, rel=1e-7)


@pytest.mark.parametrize("tau", [0.0, -1.0])
def test_susceptibility_is_causal(tau):
    with pytest.raises(DomainError):
        susceptibility_spectral(reference(1), 1.0, tau)


def test_impermissible_parameters_are_rejected():
    bad = ModelParams(d=1, eta0=1.0, eta1=-3.0, xi=1.0, mu=1.0)
    for f in (lambda: spd_static(bad, 1.0), lambda: ldecay(bad, 1.0), lambda: spd_spacetime(bad, 1.0, 0.0)):
        with pytest.raises(InvalidParameterError):
            f()


def test_bochner_scan_cases():
    assert bochner_scan(reference(1), 20.0, 4001).spectrally_positive
    assert bochner_scan(reference(1), 20.0, 4001).finite_variance
    divergent = bochner_scan(reference(3), 50.0, 8001)
    assert divergent.spectrally_positive and not divergent.finite_variance
    osc = bochner_scan(reference(1, mu=1.0, eta1=-1.0), 20.0, 4001)
    assert osc.spectrally_positive and osc.oscillatory and osc.finite_variance
    with pytest.raises(InvalidParameterError):
        bochner_scan(reference(1), 10.0, 1)


def test_bochner_scan_detects_negative_density():
    p = ModelParams(d=1, eta0=1.0, eta1=-1.0, xi=1.0)   # validate flags it too, but the scan is numerical
    assert not bochner_scan(p, 5.0, 101).spectrally_positive


@given(eta1=st.floats(-1.9, 5.0), mu=st.floats(0.5, 3.0), d=st.sampled_from([1, 2, 3]))
def test_permissible_density_is_nonnegative_and_even(eta1, mu, d):
    p = ModelParams(d=d, eta0=1.0, eta1=eta1 * math.sqrt(mu), xi=1.5, mu=mu)
    k = np.linspace(0.0, 20.0, 2001)
    assert np.all(spd_static(p, k) > 0)
    assert np.array_equal(polynomial(p, k), polynomial(p, -k))


def test_noise_spectra():
    k = np.array([0.0, 0.5, 2.0])
    assert np.array_equal(White()(k), np.ones(3))
    assert GaussianDamped(0.0)(k)[2] == 1.0
    assert GaussianDamped(2.0)(1.0) == pytest.approx(math.exp(-4.0))
    tab = Tabulated((0.0, 1.0), (1.0, 0.5))
    assert tab(0.5) == pytest.approx(0.75)
    with pytest.raises(InvalidParameterError):
        GaussianDamped(-1.0)
    with pytest.raises(InvalidParameterError):
        Tabulated((1.0, 0.0), (1.0, 1.0))
    with pytest.raises(InvalidParameterError):
        Tabulated((0.0, 1.0), (1.0, -1.0))


def test_spectral_point_rejects_negative_wavenumber():
    with pytest.raises(InvalidParameterError):
        SpectralPoint(-1.0, 0.0)
