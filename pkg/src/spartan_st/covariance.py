"""
Real-space covariance of the Spartan space-time model.

Closed forms exist for ``mu = 0`` and ``eta1 > 0``:

* ``cov_closed_d1`` / ``cov_closed_d3`` for general lags in d=1 and d=3,
* ``cov_zero_space`` (``r = 0``) and ``cov_zero_time`` (``tau = 0``) in d=1,2,3.

``cov_univariate_integral`` evaluates the same model through a monotone
one-dimensional integral (any d), and ``cov_small_mu`` adds the curvature
term through a truncated expansion in ``mu``. Arbitrary ``mu`` and negative
``eta1`` are handled by :mod:`spartan_st.quadrature`.

All functions depend on the time lag through ``|tau|`` only.
"""

from __future__ import annotations

import math
import warnings

from scipy import integrate

from .errors import AccuracyError, SingularityError, WrongMethodError
from .model import ModelParams, derived, require_permissible
from .specfun import bessel_k, erfc, erfcx, expint_ei, hyp1f1, rising_factorial
from .values import CovValue, Lag, QuadratureSpec

__all__ = [
    "Lag",
    "CovValue",
    "cov_closed_d1",
    "cov_closed_d3",
    "cov_zero_space",
    "cov_zero_time",
    "cov_univariate_integral",
    "cov_small_mu",
    "variance_d1",
]

# below these the tau -> 0 and r -> 0 limits are returned directly
TAU_LIMIT = 1e-14
R_LIMIT = 1e-14

SMALL_MU_MAX = 0.2


def _require_zero_curvature(params, d=None):
    require_permissible(params)
    if params.mu != 0:
        raise WrongMethodError(f"closed forms need mu = 0, got mu = {params.mu}")
    if d is not None and params.d != d:
        raise WrongMethodError(f"this closed form is for d = {d}, got d = {params.d}")


def variance_d1(params):
    """``C(0, 0) = eta0 / (2 sqrt(eta1))`` for d=1, mu=0."""
    return params.eta0 / (2.0 * math.sqrt(params.eta1))


def _erfc_pair(params, lag):
    """
    ``exp(-x) erfc(a - b)`` and ``exp(x) erfc(a + b)`` with ``x = r/(sqrt(eta1) xi)``,
    ``a = sqrt(D~|tau|)``, ``b = x / (2a)``.

    Since ``x = 2ab``, both share the factor ``exp(-a^2 - b^2)`` once written
    with the scaled ``erfcx``; this avoids overflow of ``exp(x)``.
    """
    x = lag.r / (math.sqrt(params.eta1) * params.xi)
    a = math.sqrt(params.dtilde * abs(lag.tau))
    b = x / (2.0 * a)
    common = math.exp(-a * a - b * b)
    if a >= b:
        first = common * erfcx(a - b)
    else:
        first = math.exp(-x) * (2.0 - erfc(b - a))
    second = common * erfcx(a + b)
    return first, second


def cov_closed_d1(params: ModelParams, lag: Lag) -> CovValue:
    """
    Explicit d=1 covariance for ``mu = 0``.

    ``C = eta0/(4 sqrt(eta1)) [e^{-x} erfc(a - b) + e^{x} erfc(a + b)]`` with
    ``x = r/(sqrt(eta1) xi)``, ``a = sqrt(D~|tau|)``, ``b = r / (2 sqrt(D~ eta1 |tau|) xi)``.
    At ``tau = 0`` this is ``eta0 e^{-x} / (2 sqrt(eta1))``.
    """
    _require_zero_curvature(params, 1)
    if params.dtilde * abs(lag.tau) < TAU_LIMIT:
        x = lag.r / (math.sqrt(params.eta1) * params.xi)
        return CovValue(variance_d1(params) * math.exp(-x), "closed_d1")
    if lag.r / params.xi < R_LIMIT:
        value = variance_d1(params) * erfc(math.sqrt(params.dtilde * abs(lag.tau)))
        return CovValue(value, "closed_d1")
    first, second = _erfc_pair(params, lag)
    return CovValue(params.eta0 / (4.0 * math.sqrt(params.eta1)) * (first + second), "closed_d1")


def cov_closed_d3(params: ModelParams, lag: Lag) -> CovValue:
    """
    Explicit d=3 covariance for ``mu = 0`` and ``r > 0``.

    ``C = eta0 xi / (8 pi eta1 r) [e^{-x} erfc(a - b) - e^{x} erfc(a + b)]``;
    at ``tau = 0`` this is ``eta0 xi e^{-x} / (4 pi eta1 r)``.

    Raises
    ------
    SingularityError
        for ``r = 0``: the d=3 field has infinite variance and ``C(0, tau)``
        is available from :func:`cov_zero_space` only for ``tau != 0``
    """
    _require_zero_curvature(params, 3)
    if lag.r == 0:
        raise SingularityError("d = 3, mu = 0 has infinite variance: the closed form is singular at r = 0")
    x = lag.r / (math.sqrt(params.eta1) * params.xi)
    if params.dtilde * abs(lag.tau) < TAU_LIMIT:
        value = params.eta0 * params.xi * math.exp(-x) / (4.0 * math.pi * params.eta1 * lag.r)
        return CovValue(value, "closed_d3")
    if lag.r / params.xi < R_LIMIT:
        return CovValue(cov_zero_space(params, lag.tau).value, "closed_d3")
    first, second = _erfc_pair(params, lag)
    value = params.eta0 * params.xi / (8.0 * math.pi * params.eta1 * lag.r) * (first - second)
    return CovValue(value, "closed_d3")


def cov_zero_space(params: ModelParams, tau: float) -> CovValue:
    """
    Temporal covariance at zero spatial lag, ``C(0, tau)``, for ``mu = 0``.

    * d=1: ``(eta0 / (2 sqrt(eta1))) erfc(sqrt(s))``
    * d=2: ``-(eta0 / (4 pi eta1)) Ei(-s)``
    * d=3: ``2 eta0 e^{-s} / (sqrt(s) (4 pi eta1)^{3/2}) - 2 eta0 erfc(sqrt(s)) / (pi (4 eta1)^{3/2})``

    with ``s = D~|tau|``. For d=2,3 the covariance diverges as ``tau -> 0``.
    """
    _require_zero_curvature(params)
    s = params.dtilde * abs(tau)
    eta0, eta1 = params.eta0, params.eta1
    if params.d == 1:
        return CovValue(variance_d1(params) * erfc(math.sqrt(s)), "zero_space")
    if s == 0:
        raise SingularityError(f"C(0, tau) diverges at tau = 0 for d = {params.d}, mu = 0")
    if params.d == 2:
        return CovValue(-eta0 / (4.0 * math.pi * eta1) * expint_ei(-s), "zero_space")
    value = (2.0 * eta0 * math.exp(-s) / (math.sqrt(s) * (4.0 * math.pi * eta1) ** 1.5)
             - 2.0 * eta0 / (math.pi * (4.0 * eta1) ** 1.5) * erfc(math.sqrt(s)))
    return CovValue(value, "zero_space")


def cov_zero_time(params: ModelParams, r: float) -> CovValue:
    """
    Spatial covariance at zero time lag (the static Spartan covariance, mu = 0).

    ``C(r, 0) = 2^{d/2} eta0 / (4 pi eta1)^{d/2} z^{1 - d/2} K_{d/2-1}(z)``
    with ``z = r / (xi sqrt(eta1))``.
    """
    _require_zero_curvature(params)
    d = params.d
    if r < 0:
        raise ValueError("r must be >= 0")
    if r == 0:
        if d == 1:
            return CovValue(variance_d1(params), "zero_time")
        raise SingularityError(f"C(r, 0) diverges at r = 0 for d = {d}, mu = 0")
    z = r / (params.xi * math.sqrt(params.eta1))
    value = (2.0 ** (d / 2) * params.eta0 / (4.0 * math.pi * params.eta1) ** (d / 2)
             * z ** (1.0 - d / 2) * bessel_k(d / 2 - 1, z))
    return CovValue(value, "zero_time")


def _kappa_integral(params, lag, m, quad, check=True):
    """
    ``int_0^inf dy e^{-y} T^{-m-d/2} M(2m + d/2, d/2; -r^2 / (4 eta1 xi^2 T))``
    with ``T = D~|tau| + y``, integrated in ``y = t^2`` to smooth the
    ``T^{-1/2}`` endpoint behaviour at ``tau = 0``.
    """
    d = params.d
    s = params.dtilde * abs(lag.tau)
    c = lag.r**2 / (4.0 * params.eta1 * params.xi**2)
    a, b = 2 * m + d / 2, d / 2
    power = m + d / 2

    def integrand(t):
        tt = s + t * t
        if tt == 0:
            return 0.0
        z = -c / tt
        if a == b:
            mval = math.exp(z)
        else:
            mval = hyp1f1(a, b, z)
        return 2.0 * t * math.exp(-t * t) * tt ** -power * mval

    t_max = 9.0
    points = sorted({p for p in (math.sqrt(c) ** 0.5 if c > 0 else 0.0, 0.1, 1.0, 3.0) if 0 < p < t_max})
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(integrand, 0.0, t_max, epsabs=0.0, epsrel=max(quad.rel_tol * 1e-2, 2e-14),
                                  limit=quad.max_subdiv, points=points or None)
    # for m >= 1 the integrand oscillates in sign and the result is far smaller
    # than int |f|, so callers summing several terms check the total instead
    if check and not err <= 10.0 * quad.rel_tol * abs(val):
        raise AccuracyError(f"kappa integral (m = {m}) did not converge: err {err:.3g}",
                            partial=val, est_error=err)
    return val, err


def cov_univariate_integral(params: ModelParams, lag: Lag, quad: QuadratureSpec | None = None) -> CovValue:
    """
    Covariance through the monotone univariate integral (mu = 0, any d)

        C = e^{-D~|tau|} / (4 pi)^{d/2} int_0^inf dk
            exp(-r^2 / (4 (beta1 + beta2 k)) - k beta0) / (beta1 + beta2 k)^{d/2}

    with ``beta0 = 1/(eta0 xi^d)``, ``beta1 = D~|tau| eta1 xi^2`` and
    ``beta2 = eta1 xi^2 beta0``. The integral is done after the change of
    variable ``y = beta0 k``. ``est_error`` is the quadrature error estimate.
    """
    quad = quad or QuadratureSpec()
    _require_zero_curvature(params)
    if params.d >= 2 and lag.r == 0 and lag.tau == 0:
        raise SingularityError(f"C(0, 0) is infinite for d = {params.d}, mu = 0")
    consts = derived(params)
    val, err = _kappa_integral(params, lag, 0, quad)
    scale = (math.exp(-consts.dtilde * abs(lag.tau)) / (4.0 * math.pi) ** (params.d / 2)
             / (consts.beta0 * params.eta1 ** (params.d / 2) * params.xi**params.d))
    return CovValue(scale * val, "univariate_integral", scale * err)


def cov_small_mu(params: ModelParams, lag: Lag, M: int = 2, quad: QuadratureSpec | None = None) -> CovValue:
    """
    Small-curvature expansion of the covariance.

    ``exp(-mu v k^4)`` is Taylor expanded to the even order ``2M``; each term
    is integrated over k in closed form, which leaves

        C ~ e^{-D~|tau|} / (4 pi)^{d/2} sum_{m=0}^{2M} (-mu)^m / m!
            (d/2)_{2m} R_m(r, tau)

        R_m = int_0^inf dk e^{-k beta0} v^m / u^{4m+d} M(2m + d/2, d/2; -r^2 / (4 u^2))

    where ``u^2 = eta1 xi^2 T``, ``v = xi^4 T`` and ``T = D~|tau| + k beta0``.
    The overall factor is ``1/(4 pi)^{d/2}``: it is the value for which the
    ``m = 0`` term equals :func:`cov_univariate_integral`.

    ``est_error`` adds the quadrature error and the magnitude of the last
    term, a crude truncation estimate. Warnings (in ``CovValue.warnings``) flag ``mu > 0.2`` and a last series
    term that is not smaller than the one before it.
    """
    quad = quad or QuadratureSpec()
    require_permissible(params)
    if params.eta1 <= 0:
        raise WrongMethodError("the small-mu expansion needs eta1 > 0")
    if M < 1:
        raise ValueError("truncation order M must be >= 1")
    d = params.d
    notes = []
    if params.mu > SMALL_MU_MAX:
        notes.append(f"mu = {params.mu} exceeds {SMALL_MU_MAX}: the small-mu expansion may be inaccurate")
    n_terms = 1 if params.mu == 0 else 2 * M + 1
    if lag.r == 0 and lag.tau == 0 and (n_terms > 1 or d >= 2):
        raise SingularityError(
            "the small-mu series terms diverge at (r, tau) = (0, 0); use cov_spectral_numeric")
    consts = derived(params)
    terms = []
    err_total = 0.0
    for m in range(n_terms):
        val, err = _kappa_integral(params, lag, m, quad, check=False)
        # R_m = val / (beta0 eta1^{2m + d/2} xi^d)
        coeff = ((-params.mu) ** m / math.factorial(m) * rising_factorial(d / 2, 2 * m)
                 / (consts.beta0 * params.eta1 ** (2 * m + d / 2) * params.xi**d))
        terms.append(coeff * val)
        err_total += abs(coeff) * err
    if n_terms > 2 and abs(terms[-1]) >= abs(terms[-2]):
        notes.append("series terms are not decreasing at the truncation order; the expansion may diverge")
    total = math.fsum(terms)
    # quadrature error only matters when it is above the truncation error
    trunc = abs(terms[-1]) if n_terms > 1 else 0.0
    if not err_total <= max(10.0 * quad.rel_tol * abs(total), trunc):
        scale = math.exp(-consts.dtilde * abs(lag.tau)) / (4.0 * math.pi) ** (d / 2)
        raise AccuracyError(f"small-mu series terms not resolved: error {scale * err_total:.3g}",
                            partial=scale * total, est_error=scale * err_total)
    scale = math.exp(-consts.dtilde * abs(lag.tau)) / (4.0 * math.pi) ** (d / 2)
    return CovValue(scale * total, "small_mu_series", scale * (err_total + trunc), tuple(notes))


def small_mu_terms(params: ModelParams, lag: Lag, M: int = 2, quad: QuadratureSpec | None = None):
    """Individual series contributions ``m = 0..2M`` (scaled like the covariance)."""
    quad = quad or QuadratureSpec()
    consts = derived(params)
    d = params.d
    scale = math.exp(-consts.dtilde * abs(lag.tau)) / (4.0 * math.pi) ** (d / 2)
    out = []
    for m in range(2 * M + 1):
        val, _ = _kappa_integral(params, lag, m, quad, check=False)
        coeff = ((-params.mu) ** m / math.factorial(m) * rising_factorial(d / 2, 2 * m)
                 / (consts.beta0 * params.eta1 ** (2 * m + d / 2) * params.xi**d))
        out.append(scale * coeff * val)
    return out
