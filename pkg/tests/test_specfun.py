"""Special functions against mpmath (live) and 20-digit mpmath values (frozen)."""

import math

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spartan_st.errors import AccuracyError, DomainError
from spartan_st.specfun import (CONTRACTS, bessel_j, bessel_k, erfc, erfcx, expint_ei, hyp1f1,
                                rising_factorial)

mp.mp.dps = 30


def rel(a, b):
    return abs(a - b) / abs(b)


@pytest.mark.parametrize("x, expected", [
    (-3.0, 1.9999779095030014146),
    (-0.5, 1.5204998778130465377),
    (0.3, 0.67137324054087258381),
    (1.0, 0.15729920705028513066),
    (2.5, 0.00040695201744495893956),
    (6.0, 2.1519736712498913117e-17),
    (27.0, 5.237048923789255685e-319),
])
def test_erfc_reference_values(x, expected):
    if expected < 1e-300:
        assert erfc(x) == pytest.approx(expected, rel=1e-9)  # subnormal range
    else:
        assert rel(erfc(x), expected) <= 1e-13


def test_erfc_limits():
    assert erfc(0.0) == 1.0
    assert erfc(40.0) <= 1e-300
    assert erfc(-40.0) == 2.0


def test_erfc_reflection_and_monotonicity():
    x = np.linspace(-6.0, 6.0, 241)
    values = erfc(x)
    assert np.max(np.abs(values + erfc(-x) - 2.0)) <= 1e-13
    assert np.all(np.diff(values) <= 0)  # saturates to 2.0 in double precision near -6
    assert np.all(np.diff(values[60:]) < 0)


@settings(max_examples=200, deadline=None)
@given(st.floats(-6.0, 26.0))
def test_erfc_contract(x):
    assert rel(erfc(x), float(mp.erfc(x))) <= CONTRACTS["erfc"].rel_tol


@settings(max_examples=200, deadline=None)
@given(st.floats(-5.0, 1e6))
def test_erfcx_contract(x):
    assert rel(erfcx(x), float(mp.exp(mp.mpf(x) ** 2) * mp.erfc(x))) <= CONTRACTS["erfcx"].rel_tol


@pytest.mark.parametrize("x, expected", [
    (-0.001, -6.3315393641361493112),
    (-1.0, -0.21938393439552027368),
    (-10.0, -4.1569689296853242774e-6),
    (-35.0, -1.7527059389947372001e-17),
    (-200.0, -6.8852261063076355977e-90),
])
def test_ei_reference_values(x, expected):
    assert rel(expint_ei(x), expected) <= 1e-12


def test_ei_domain():
    assert expint_ei(0.0) == -math.inf
    with pytest.raises(DomainError):
        expint_ei(0.5)


def test_ei_logarithmic_divergence():
    # Ei(x) = gamma + ln|x| + x + O(x^2) as x -> 0-
    for x in (-1e-4, -1e-8, -1e-12):
        assert expint_ei(x) - math.log(-x) - x == pytest.approx(0.5772156649015329, abs=x * x + 1e-14)


@settings(max_examples=200, deadline=None)
@given(st.floats(-700.0, -1e-6))
def test_ei_contract(x):
    assert rel(expint_ei(x), float(mp.ei(x))) <= CONTRACTS["expint_ei"].rel_tol


@pytest.mark.parametrize("x, expected", [
    (1e-3, 7.0236888005623813228),
    (0.5, 0.92441907122766586178),
    (1.0, 0.42102443824070833334),
    (2.5, 0.062347553200366186029),
    (10.0, 0.000017780062316167651811),
    (80.0, 2.5251198425054718152e-36),
])
def test_k0_reference_values(x, expected):
    assert rel(bessel_k(0, x), expected) <= 1e-13


def test_k_half_integer_orders():
    assert bessel_k(0.5, 1.0) == pytest.approx(math.sqrt(math.pi / 2.0) / math.e, rel=1e-15)
    assert bessel_k(-0.5, 2.0) == bessel_k(0.5, 2.0)
    x = np.geomspace(0.01, 50.0, 200)
    assert np.max(np.abs(bessel_k(0.5, x) * np.sqrt(2 * x / np.pi) * np.exp(x) - 1.0)) <= 1e-12


def test_k_domain():
    with pytest.raises(DomainError):
        bessel_k(0, 0.0)
    with pytest.raises(DomainError):
        bessel_k(0, -1.0)
    with pytest.raises(DomainError):
        bessel_k(1, 1.0)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-6, 700.0))
def test_k0_contract(x):
    assert rel(bessel_k(0, x), float(mp.besselk(0, x))) <= CONTRACTS["bessel_k"].rel_tol


@pytest.mark.parametrize("x, expected", [
    (0.5, 0.93846980724081290423),
    (5.0, -0.17759677131433830435),
    (25.0, 0.096266783275958116174),
    (35.0, -0.12684568275631256981),
    (120.0, 0.071823415829156127576),
])
def test_j0_reference_values(x, expected):
    assert abs(bessel_j(0, x) - expected) <= 1e-14


def test_j_special_values():
    assert bessel_j(0, 0.0) == 1.0
    assert abs(bessel_j(0.5, math.pi)) <= 1e-12
    assert abs(bessel_j(0, 2.404825557695773)) <= 1e-9
    assert bessel_j(-0.5, 1.0) == pytest.approx(math.sqrt(2 / math.pi) * math.cos(1.0), rel=1e-15)


@settings(max_examples=200, deadline=None)
@given(st.floats(0.0, 1e4))
def test_j0_contract(x):
    exact = float(mp.besselj(0, x))
    assert abs(bessel_j(0, x) - exact) <= CONTRACTS["bessel_j"].rel_tol * max(1.0, abs(exact))


@pytest.mark.parametrize("a, b, z, expected", [
    (2.5, 0.5, -1.0, -0.61313240195240386933),
    (4.5, 0.5, -3.0, 0.18634588446257647229),
    (5.0, 1.0, -0.7, -0.27245773424145421902),
    (7.5, 1.5, -40.0, 2.5803340085518266782e-12),
    (1.5, 1.5, -2.0, 0.13533528323661269189),
    (9.0, 1.0, -12.5, 0.00035570661942945954033),
])
def test_hyp1f1_reference_values(a, b, z, expected):
    assert rel(hyp1f1(a, b, z), expected) <= 1e-10


@pytest.mark.parametrize("b", [0.5, 1.0, 1.5])
def test_hyp1f1_equal_parameters_is_exponential(b):
    z = np.linspace(-50.0, 0.0, 101)
    assert np.max(np.abs(hyp1f1(b, b, z) / np.exp(z) - 1.0)) <= 1e-10


def test_hyp1f1_zero_argument_and_domain():
    assert hyp1f1(4.5, 0.5, 0.0) == 1.0
    with pytest.raises(DomainError):
        hyp1f1(1.5, 0.5, 1.0)


def test_hyp1f1_term_cap_reports_partial_sum():
    # the Kummer-transformed series is not polynomial for a non-integer b - a
    with pytest.raises(AccuracyError) as info:
        hyp1f1(0.3, 0.5, -0.9, max_terms=3)
    assert info.value.partial is not None


@settings(max_examples=150, deadline=None)
@given(m=st.integers(0, 6), b=st.sampled_from([0.5, 1.0, 1.5]), z=st.floats(-200.0, 0.0))
def test_hyp1f1_contract(m, b, z):
    # condition-relative bound: scale by |M| + e^z sum |terms of the polynomial|
    a = b + 2 * m
    exact = mp.hyp1f1(a, b, z)
    terms = sum(abs(mp.rf(b - a, n) / mp.rf(b, n) * (-mp.mpf(z)) ** n / mp.factorial(n)) for n in range(2 * m + 1))
    scale = abs(exact) + mp.exp(z) * terms
    assert abs(hyp1f1(a, b, z) - float(exact)) <= CONTRACTS["hyp1f1"].rel_tol * float(scale)


def test_rising_factorial():
    assert rising_factorial(0.5, 0) == 1.0
    assert rising_factorial(0.5, 4) == 0.5 * 1.5 * 2.5 * 3.5
    assert rising_factorial(1.5, 2) == pytest.approx(math.gamma(3.5) / math.gamma(1.5))


def test_array_inputs_keep_shape():
    x = np.array([[0.1, 1.0], [2.0, 3.0]])
    for f in (erfc, erfcx):
        assert f(x).shape == x.shape
    assert bessel_k(0, x).shape == x.shape
    assert expint_ei(-x).shape == x.shape
