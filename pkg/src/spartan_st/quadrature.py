"""
Numerical evaluation of the isotropic spectral representation.

For a radial spectral weight the space-time covariance reduces to a single
wavenumber integral,

    C(r, tau) = c_d exp(-D~|tau|) eta0 xi^d
                * int_0^inf dk k^(d-1) kernel_d(k r) w(k) exp(-D~|tau| (P(k) - 1)) / P(k)

with ``c_1 = 1/pi`` (kernel cos), ``c_2 = 1/(2 pi)`` (kernel J0) and
``c_3 = 1/(2 pi^2)`` (kernel sinc). This module is the independent oracle for
every closed form in :mod:`spartan_st.covariance`: it only uses elementary
kernels (and J0 for d=2) and adaptive Gauss-Kronrod panels.

For ``r > 0`` the integrand is split at the kernel zeros; the panel
integrals form an alternating sequence whose partial sums are accelerated
with Wynn's epsilon algorithm, so slowly decaying tails (``tau = 0``,
``mu = 0``) still converge to the infinite-range value.
"""

from __future__ import annotations

import math
import warnings

from scipy import integrate

from .errors import AccuracyError, SingularityError
from .model import ModelParams, require_permissible
from .spectral import GaussianDamped, Tabulated, White
from .specfun import bessel_j, erfc, expint_ei
from .values import CovValue, Lag, QuadratureSpec

__all__ = [
    "QuadratureSpec",
    "cov_spectral_numeric",
    "cov_colored_noise",
    "tail_bound",
    "wynn_epsilon",
]

_PREFACTOR = {1: 1.0 / math.pi, 2: 1.0 / (2.0 * math.pi), 3: 1.0 / (2.0 * math.pi**2)}


def _noise_sup(noise):
    if noise is None or isinstance(noise, (White, GaussianDamped)):
        return 1.0
    if isinstance(noise, Tabulated):
        return float(max(noise.values))
    return 1.0


def _min_poly_beyond(params, k):
    """min of P over [k, inf)."""
    x = (k * params.xi) ** 2
    if params.mu > 0:
        x = max(x, -params.eta1 / (2.0 * params.mu))
    return 1.0 + params.eta1 * x + params.mu * x * x


def tail_bound(params: ModelParams, lag: Lag, k_cut: float, weight_sup: float = 1.0) -> float:
    """
    Upper bound on the spectral mass discarded beyond ``k_cut``.

    Uses ``|kernel| <= 1`` and a power-law lower bound on ``P(k)``
    (quartic for ``mu > 0``, quadratic for ``mu = 0``); for ``mu = 0`` and
    ``tau != 0`` the Gaussian damping is integrated exactly. Returns ``inf``
    when the tail is not integrable under these bounds.
    """
    if not k_cut > 0:
        raise ValueError("k_cut must be > 0")
    d, xi, mu, eta1 = params.d, params.xi, params.mu, params.eta1
    at = params.dtilde * abs(lag.tau)
    pref = _PREFACTOR[d] * params.eta0 * xi**d * math.exp(-at) * weight_sup
    xc = (k_cut * xi) ** 2
    if mu > 0:
        factor = 1.0 + min(0.0, eta1 / (mu * xc))
        if factor <= 0:
            return math.inf
        damp = math.exp(-at * (_min_poly_beyond(params, k_cut) - 1.0))
        return pref * damp * k_cut ** (d - 4) / ((4 - d) * factor * mu * xi**4)
    coeff = pref / (eta1 * xi**2)
    if at == 0:
        return coeff / k_cut if d == 1 else math.inf
    alpha = at * eta1 * xi**2
    gauss = math.sqrt(math.pi) / (2.0 * math.sqrt(alpha)) * erfc(math.sqrt(alpha) * k_cut)
    if d == 1:
        return coeff * min(math.exp(-alpha * k_cut**2) / k_cut, gauss / k_cut**2)
    if d == 2:
        return coeff * 0.5 * -expint_ei(-alpha * k_cut**2)
    return coeff * gauss


def wynn_epsilon(partial_sums):
    """
    Wynn's epsilon extrapolation of a sequence of partial sums.

    Returns ``(estimate, error)`` where the error is the spread of the last
    two entries of the highest even column that could be formed.
    """
    s = [float(v) for v in partial_sums]
    if len(s) < 3:
        return s[-1], abs(s[-1] - s[-2]) if len(s) == 2 else math.inf
    prev = [0.0] * (len(s) + 1)
    cur = s
    best = (s[-1], abs(s[-1] - s[-2]))
    col = 0
    while len(cur) > 1:
        nxt = []
        for i in range(len(cur) - 1):
            diff = cur[i + 1] - cur[i]
            if diff == 0.0:
                if col % 2 == 0:
                    return cur[i + 1], 0.0
                return best
            nxt.append(prev[i + 1] + 1.0 / diff)
        prev, cur = cur, nxt
        col += 1
        if col % 2 == 0 and len(cur) >= 2:
            best = (cur[-1], abs(cur[-1] - cur[-2]))
    return best


def _scale_wavenumber(params):
    """Wavenumber beyond which P(k) follows its leading power law."""
    if params.mu > 0:
        x = max(params.mu ** -0.5, abs(params.eta1) / params.mu, 1.0)
    else:
        x = max(1.0 / params.eta1, 1.0)
    return math.sqrt(x) / params.xi


def _kernel_zero(d, r, n):
    """n-th positive zero (n >= 1) of the radial kernel at spatial lag r."""
    if d == 1:
        return (n - 0.5) * math.pi / r
    if d == 3:
        return n * math.pi / r
    beta = (n - 0.25) * math.pi
    return (beta + 1.0 / (8.0 * beta) - 31.0 / (384.0 * beta**3)) / r


def _make_integrand(params, lag, noise):
    d, xi, eta1, mu = params.d, params.xi, params.eta1, params.mu
    at = params.dtilde * abs(lag.tau)
    r = lag.r
    weight = noise if noise is not None and not isinstance(noise, White) else None

    def smooth(k):
        x = (k * xi) ** 2
        p = 1.0 + eta1 * x + mu * x * x
        val = math.exp(-at * (p - 1.0)) / p
        if weight is not None:
            val *= float(weight(k))
        return val

    if r == 0:
        if d == 1:
            return smooth
        if d == 2:
            return lambda k: k * smooth(k)
        return lambda k: k * k * smooth(k)
    if d == 1:
        return lambda k: math.cos(k * r) * smooth(k)
    if d == 2:
        return lambda k: k * bessel_j(0, k * r) * smooth(k)

    def sinc_integrand(k):
        kr = k * r
        s = math.sin(kr) / kr if kr != 0 else 1.0
        return k * k * s * smooth(k)

    return sinc_integrand


def _quad(f, a, b, spec, epsabs, points=None):
    pts = None
    if points is not None and math.isfinite(b):
        pts = [p for p in points if a < p < b] or None
    # quad needs more subintervals than breakpoints
    limit = max(spec.max_subdiv, 2 * len(pts) + 50) if pts else spec.max_subdiv
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=max(spec.rel_tol * 1e-2, 2e-14),
                                      limit=limit, points=pts)
        except integrate.IntegrationWarning:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", integrate.IntegrationWarning)
                val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=max(spec.rel_tol * 1e-2, 2e-14),
                                          limit=limit, points=pts)
            if not err <= max(epsabs, spec.rel_tol * abs(val)):
                raise AccuracyError(
                    f"adaptive quadrature on [{a}, {b}] did not converge (err {err:.3g})",
                    partial=val, est_error=err)
    return val, err


def _radial_integral(params, lag, quad, noise=None):
    """Integral of the radial integrand (without the c_d eta0 xi^d e^{-D~|tau|} prefactor)."""
    f = _make_integrand(params, lag, noise)
    ks = _scale_wavenumber(params)
    scale_points = [0.1 * ks, ks, 10.0 * ks, 100.0 * ks]
    if isinstance(noise, Tabulated):
        # the interpolated table has kinks at its knots
        scale_points = sorted(set(scale_points) | set(float(k) for k in noise.k))
    pref = _PREFACTOR[params.d] * params.eta0 * params.xi**params.d * math.exp(-params.dtilde * abs(lag.tau))
    sup = _noise_sup(noise)

    def bound(k):
        return tail_bound(params, lag, k, sup) / pref

    if lag.r == 0 or quad.scheme == "adaptive_gk":
        kc = quad.k_cut
        val, err = _quad(f, 0.0, kc, quad, 0.0, scale_points)
        tb = bound(kc)
        if tb > quad.rel_tol * abs(val) * 0.1:
            if lag.r > 0:
                # plain Gauss-Kronrod on an oscillatory infinite tail
                tval, terr = integrate.quad(f, kc, math.inf, epsabs=quad.rel_tol * abs(val) * 1e-2,
                                            epsrel=max(quad.rel_tol * 1e-2, 2e-14), limit=quad.max_subdiv)
            else:
                tval, terr = _quad(f, kc, math.inf, quad, quad.rel_tol * abs(val) * 1e-2)
            val += tval
            err += terr
        else:
            err += tb
        return val, err

    # oscillatory partition at kernel zeros
    edges = [0.0]
    sums = []
    total = 0.0
    err_total = 0.0
    n = 0
    extrapolated = []
    while True:
        n += 1
        if n > quad.max_subdiv:
            est = extrapolated[-1] if extrapolated else (total, math.inf)
            raise AccuracyError(
                f"oscillatory quadrature did not converge after {quad.max_subdiv} panels",
                partial=est[0] * pref, est_error=est[1] * pref)
        a, b = edges[-1], _kernel_zero(params.d, lag.r, n)
        epsabs = 1e-3 * quad.rel_tol * abs(total) if n > 1 else 0.0
        val, err = _quad(f, a, b, quad, epsabs, scale_points)
        total += val
        err_total += err
        edges.append(b)
        sums.append(total)
        tb = bound(b)
        if tb <= 0.1 * quad.rel_tol * abs(total) and b >= min(quad.k_cut, ks):
            return total, err_total + tb
        if b < ks or len(sums) < 6:
            continue
        tail = sums[-min(len(sums), 30):]
        est, est_err = wynn_epsilon(tail)
        extrapolated.append((est, est_err))
        if len(extrapolated) >= 3:
            e1, e2, e3 = (x[0] for x in extrapolated[-3:])
            spread = max(abs(e1 - e3), abs(e2 - e3))
            if spread <= 0.1 * quad.rel_tol * abs(e3) + 1e-300:
                return e3, err_total + spread + extrapolated[-1][1]


def _check_singular(params, lag, noise=None):
    if params.mu == 0 and params.d >= 2 and lag.r == 0 and lag.tau == 0:
        if isinstance(noise, GaussianDamped) and noise.a > 0:
            return
        raise SingularityError(
            f"C(0, 0) is infinite for mu = 0 in d = {params.d}: the field has infinite variance")


def cov_spectral_numeric(params: ModelParams, lag: Lag, quad: QuadratureSpec | None = None) -> CovValue:
    """
    Space-time covariance from the spectral representation, for any
    permissible ``(eta1, mu)``.

    d=1 uses the cosine kernel, d=2 the J0 kernel, d=3 the sinc kernel with
    prefactor ``eta0 xi^3 / (2 pi^2)``.

    Raises
    ------
    SingularityError
        for ``mu = 0``, ``d in (2, 3)`` at ``(r, tau) = (0, 0)``
    AccuracyError
        when the panel sum or an adaptive panel fails to converge
    """
    quad = quad or QuadratureSpec()
    require_permissible(params)
    _check_singular(params, lag)
    val, err = _radial_integral(params, lag, quad)
    pref = _PREFACTOR[params.d] * params.eta0 * params.xi**params.d * math.exp(-params.dtilde * abs(lag.tau))
    return CovValue(pref * val, "spectral_quadrature", pref * err)


def cov_colored_noise(params: ModelParams, noise, lag: Lag, quad: QuadratureSpec | None = None) -> CovValue:
    """
    Covariance of the field driven by noise with spatial spectral density ``c(k)``.

    Each Fourier mode relaxes at rate ``L(k) = D~ P(k)`` and receives noise
    power ``D c(k)``, so its stationary spectrum is ``D c(k) / (2 L(k))`` and
    the lagged spectrum decays like ``exp(-L(k)|tau|)``. ``White()`` reproduces
    :func:`cov_spectral_numeric` with the identical integrand.
    """
    quad = quad or QuadratureSpec()
    require_permissible(params)
    if noise is None:
        noise = White()
    _check_singular(params, lag, noise)
    if isinstance(noise, White):
        value = cov_spectral_numeric(params, lag, quad)
        return CovValue(value.value, "colored_noise", value.est_error)
    val, err = _radial_integral(params, lag, quad, noise)
    pref = _PREFACTOR[params.d] * params.eta0 * params.xi**params.d * math.exp(-params.dtilde * abs(lag.tau))
    return CovValue(pref * val, "colored_noise", pref * err)


def radial_prefactor(params):
    """``c_d`` of the radial reduction, exposed for tests and simulators."""
    return _PREFACTOR[params.d]

