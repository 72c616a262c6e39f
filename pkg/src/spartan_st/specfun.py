"""
Special functions needed by the covariance formulas.

Only the arguments the model actually uses are supported:

* ``erfc`` / ``erfcx`` on the whole real line,
* ``expint_ei`` for negative arguments only,
* ``bessel_k`` and ``bessel_j`` for orders -1/2, 0, 1/2,
* ``hyp1f1`` (Kummer's M) for nonpositive argument.

Every public function accepts a float or an array-like and returns the same
shape. Accuracy contracts (checked in the test suite against mpmath):

=========  ===========================  ==========================
function   bound                        domain
=========  ===========================  ==========================
erfc       rel 1e-12                    [-40, 40]
erfcx      rel 1e-12                    [-5, 1e6]
expint_ei  rel 1e-10                    [-700, -1e-300]
bessel_k   rel 1e-12                    (0, 700]
bessel_j   abs 1e-12 * max(1, |J|)      [0, 1e6]
hyp1f1     rel 1e-10 (*)                a = b + integer >= 0, z <= 0
=========  ===========================  ==========================

(*) relative to ``|M| + exp(z) sum_n |t_n|`` where ``t_n`` are the terms of
the transformed series, i.e. relative to the condition of the sum; near a
real zero of M the pointwise relative error is unbounded for any method.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass

import numpy as np

from .errors import AccuracyError, DomainError

__all__ = [
    "AccuracyContract",
    "CONTRACTS",
    "erfc",
    "erfcx",
    "expint_ei",
    "bessel_k",
    "bessel_j",
    "hyp1f1",
    "rising_factorial",
    "EULER_GAMMA",
]

EULER_GAMMA = 0.57721566490153286061
_SQRT_PI = math.sqrt(math.pi)
_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class AccuracyContract:
    rel_tol: float
    domain: tuple[float, float]
    absolute: bool = False


CONTRACTS = {
    "erfc": AccuracyContract(1e-12, (-40.0, 40.0)),
    "erfcx": AccuracyContract(1e-12, (-5.0, 1e6)),
    "expint_ei": AccuracyContract(1e-10, (-700.0, -1e-300)),
    "bessel_k": AccuracyContract(1e-12, (1e-300, 700.0)),
    "bessel_j": AccuracyContract(1e-12, (0.0, 1e6), absolute=True),
    "hyp1f1": AccuracyContract(1e-10, (-1e3, 0.0)),
}


def _elementwise(func):
    """Lift a scalar function of its trailing argument to arrays."""

    @functools.wraps(func)
    def wrapper(*args):
        x = args[-1]
        if np.ndim(x) == 0:
            return func(*args[:-1], float(x))
        arr = np.asarray(x, dtype=float)
        out = np.empty_like(arr)
        for idx, value in np.ndenumerate(arr):
            out[idx] = func(*args[:-1], float(value))
        return out

    return wrapper


# -- error function -----------------------------------------------------------

def _erf_series(x):
    # erf(x) = 2/sqrt(pi) exp(-x^2) sum_n 2^n x^(2n+1) / (1*3*...*(2n+1)); all terms positive
    x2 = x * x
    term = x
    total = x
    n = 0
    while term > _EPS * 1e-2 * total:
        n += 1
        term *= 2.0 * x2 / (2 * n + 1)
        total += term
    return 2.0 / _SQRT_PI * math.exp(-x2) * total


def _erfcx_cf(x):
    """exp(x^2) erfc(x) for x >= 2 from the Laplace continued fraction (modified Lentz)."""
    # erfc(x) = exp(-x^2)/sqrt(pi) * 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + ...))))
    tiny = 1e-300
    f = x
    c = x
    d = 0.0
    for n in range(1, 5000):
        a = 0.5 * n
        d = x + a * d
        d = tiny if d == 0 else d
        c = x + a / c
        c = tiny if c == 0 else c
        d = 1.0 / d
        delta = c * d
        f *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:  # pragma: no cover - converges in < 200 terms for x >= 2
        raise AccuracyError("erfc continued fraction did not converge", partial=1.0 / (_SQRT_PI * f))
    return 1.0 / (_SQRT_PI * f)


def _erfc_pos(x):
    if x < 2.0:
        return 1.0 - _erf_series(x)
    if x > 27.3:
        # exp(-x^2) underflows below the smallest double
        return 0.0 if x > 30 else math.exp(-x * x) * _erfcx_cf(x)
    return math.exp(-x * x) * _erfcx_cf(x)


@_elementwise
def erfc(x):
    """
    Complementary error function ``2/sqrt(pi) * int_x^inf exp(-t^2) dt``.

    Negative arguments go through ``2 - erfc(|x|)`` so that no cancellation
    occurs when the argument tends to minus infinity.
    """
    if math.isnan(x):
        return math.nan
    if x < 0:
        return 2.0 - _erfc_pos(-x)
    return _erfc_pos(x)


@_elementwise
def erfcx(x):
    """Scaled complementary error function ``exp(x^2) erfc(x)``."""
    if x >= 2.0:
        return _erfcx_cf(x)
    if x >= 0:
        return math.exp(x * x) * (1.0 - _erf_series(x))
    if x < -26.6:
        return math.inf
    return math.exp(x * x) * (2.0 - _erfc_pos(-x))


# -- exponential integral -----------------------------------------------------

def _e1(z):
    """E1(z) = -Ei(-z) for z > 0."""
    if z <= 1.0:
        # E1(z) = -gamma - ln z - sum_{k>=1} (-z)^k / (k k!)
        total = 0.0
        term = 1.0
        k = 0
        while True:
            k += 1
            term *= -z / k
            contrib = term / k
            total += contrib
            if abs(contrib) < _EPS * 1e-2:
                break
        return -EULER_GAMMA - math.log(z) - total
    # continued fraction E1(z) = exp(-z) / (z + 1 - 1^2/(z + 3 - 2^2/(z + 5 - ...)))
    tiny = 1e-300
    b = z + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, 10000):
        an = -float(i * i)
        b += 2.0
        d = 1.0 / (an * d + b)
        c = b + an / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < 1e-16:
            break
    else:  # pragma: no cover
        raise AccuracyError("E1 continued fraction did not converge", partial=h * math.exp(-z))
    return h * math.exp(-z)


@_elementwise
def expint_ei(x):
    """
    Exponential integral ``Ei(x) = int_{-inf}^x e^t / t dt`` for ``x < 0``.

    Near zero it behaves like ``gamma + ln|x|``; ``x = 0`` itself is the
    logarithmic singularity and is reported as ``-inf``. Positive arguments
    raise ``DomainError``.
    """
    if x > 0 or math.isnan(x):
        raise DomainError(f"expint_ei is only implemented for x < 0, got {x!r}")
    if x == 0:
        return -math.inf
    return -_e1(-x)


# -- modified Bessel function of the second kind ------------------------------

def _k0_series(x):
    # K0(x) = -(ln(x/2) + gamma) I0(x) + sum_k (x^2/4)^k / (k!)^2 H_k
    q = 0.25 * x * x
    log_term = math.log(0.5 * x) + EULER_GAMMA
    term = 1.0
    i0 = 1.0
    hsum = 0.0
    harmonic = 0.0
    k = 0
    while True:
        k += 1
        term *= q / (k * k)
        harmonic += 1.0 / k
        i0 += term
        hsum += term * harmonic
        if term < _EPS * 1e-2 * i0:
            break
    return -log_term * i0 + hsum


def _k0_scaled_trapezoid(x):
    # exp(x) K0(x) = int_0^inf exp(-x (cosh t - 1)) dt; trapezoid rule converges geometrically
    t_max = math.acosh(1.0 + 40.0 / x)
    # the integrand's width shrinks like 1/sqrt(x): keep >= 80 nodes under it
    h = min(0.05, t_max / 80.0)
    n = int(math.ceil(t_max / h))
    total = 0.5
    for i in range(1, n + 1):
        total += math.exp(-x * (math.cosh(i * h) - 1.0))
    return total * h


@_elementwise
def _bessel_k_impl(nu, x):
    if not x > 0:
        raise DomainError(f"bessel_k requires x > 0, got {x!r}")
    if nu in (0.5, -0.5):
        return math.sqrt(math.pi / (2.0 * x)) * math.exp(-x)
    if x <= 2.0:
        return _k0_series(x)
    return _k0_scaled_trapezoid(x) * math.exp(-x)


def bessel_k(nu, x):
    """
    Modified Bessel function of the second kind ``K_nu(x)`` for nu in {-1/2, 0, 1/2}.

    Half-integer orders use the closed form ``sqrt(pi/(2x)) exp(-x)``. ``K_0``
    uses its ascending series for ``x <= 2`` and the trapezoid rule on
    ``int_0^inf exp(-x cosh t) dt`` beyond.
    """
    nu = float(nu)
    if nu not in (-0.5, 0.0, 0.5):
        raise DomainError(f"bessel_k supports nu in {{-1/2, 0, 1/2}}, got {nu!r}")
    return _bessel_k_impl(nu, x)


# -- Bessel function of the first kind ----------------------------------------

def _j0_trapezoid(x):
    # J0(x) = (1/pi) int_0^pi cos(x sin t) dt; the periodic trapezoid rule is exact up to
    # terms of order J_{2N}(x), negligible once N exceeds x by a margin.
    n = int(x) + 40
    h = math.pi / n
    total = 0.5 * (1.0 + 1.0)
    for i in range(1, n):
        total += math.cos(x * math.sin(i * h))
    return total / n


def _j0_hankel(x):
    # Hankel expansion J0 = sqrt(2/(pi x)) (P cos(x - pi/4) - Q sin(x - pi/4)) with
    # t_k = prod_{j<=k} (-(2j-1)^2) / (k! (8x)^k), P = t0 - t2 + t4 ..., Q = t1 - t3 + ...
    z8 = 8.0 * x
    p = 1.0
    q = 0.0
    term = 1.0
    k = 0
    while True:
        k += 1
        new = term * (-(2 * k - 1) ** 2) / (k * z8)
        if abs(new) >= abs(term) or abs(new) < 1e-18:
            break
        term = new
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2:
            q += sign * term
        else:
            p += sign * term
    theta = x - 0.25 * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (p * math.cos(theta) - q * math.sin(theta))


@_elementwise
def _bessel_j_impl(nu, x):
    if x < 0 or math.isnan(x):
        raise DomainError(f"bessel_j requires x >= 0, got {x!r}")
    if nu == 0.5:
        return 0.0 if x == 0 else math.sqrt(2.0 / (math.pi * x)) * math.sin(x)
    if nu == -0.5:
        if x == 0:
            return math.inf
        return math.sqrt(2.0 / (math.pi * x)) * math.cos(x)
    if x <= 30.0:
        return _j0_trapezoid(x)
    return _j0_hankel(x)


def bessel_j(nu, x):
    """
    Bessel function of the first kind ``J_nu(x)`` for nu in {-1/2, 0, 1/2}.

    ``J_0`` is evaluated with the periodic trapezoid rule on its integral
    representation up to ``x = 30`` and with the Hankel expansion beyond.
    """
    nu = float(nu)
    if nu not in (-0.5, 0.0, 0.5):
        raise DomainError(f"bessel_j supports nu in {{-1/2, 0, 1/2}}, got {nu!r}")
    return _bessel_j_impl(nu, x)


# -- confluent hypergeometric function ----------------------------------------

def rising_factorial(a, n):
    """Pochhammer symbol ``a (a+1) ... (a+n-1)`` by iterated multiplication."""
    out = 1.0
    for i in range(n):
        out *= a + i
    return out


def _m_series(a, b, z, rel_tol, max_terms):
    term = 1.0
    total = 1.0
    for n in range(max_terms):
        term *= (a + n) * z / ((b + n) * (n + 1))
        total += term
        if term == 0.0:
            return total
        if abs(term) < rel_tol * abs(total) and n > abs(z):
            return total
    raise AccuracyError(
        f"1F1({a}, {b}; {z}) series did not converge in {max_terms} terms", partial=total)


def _m_scalar(a, b, z, rel_tol=1e-16, max_terms=10000):
    if z > 0:
        raise DomainError(f"hyp1f1 is only implemented for z <= 0, got {z!r}")
    if z == 0:
        return 1.0
    if a == b:
        return math.exp(z)
    # Kummer's transformation M(a, b; z) = e^z M(b - a, b; -z) turns an alternating series
    # into one with a positive argument; for b - a a nonpositive integer it terminates.
    c = b - a
    if z < -1.0 or (c <= 0 and c == int(c)):
        if z < -745.0:
            return 0.0 if (c <= 0 and c == int(c)) or a > 0 else math.nan
        return math.exp(z) * _m_series(c, b, -z, rel_tol, max_terms)
    return _m_series(a, b, z, rel_tol, max_terms)


def hyp1f1(a, b, z, rel_tol=1e-16, max_terms=10000):
    """
    Kummer's confluent hypergeometric function ``M(a, b; z)`` for ``z <= 0``.

    Summed from the rising-factorial series until the last term falls below
    ``rel_tol`` times the partial sum. For ``z < -1`` (and always when
    ``b - a`` is a nonpositive integer, where the transformed series is a
    polynomial) Kummer's transformation is applied first.

    Raises
    ------
    DomainError
        for ``z > 0``
    AccuracyError
        when ``max_terms`` is exhausted; ``partial`` holds the partial sum
    """
    a = float(a)
    b = float(b)
    if np.ndim(z) == 0:
        return _m_scalar(a, b, float(z), rel_tol, max_terms)
    arr = np.asarray(z, dtype=float)
    out = np.empty_like(arr)
    for idx, value in np.ndenumerate(arr):
        out[idx] = _m_scalar(a, b, float(value), rel_tol, max_terms)
    return out
