"""
Frequency-domain quantities of the Spartan space-time model.

Fourier conventions: ``x~(k) = int ds exp(-i k.s) x(s)`` and
``x(s) = (2 pi)^-d int dk exp(i k.s) x~(k)``; time transforms use
``exp(-i omega tau)`` with cyclic frequency ``omega``. All spectra depend on
the wavevector through ``k = |k|`` only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import DomainError, InvalidParameterError
from .model import ModelParams, PermissibilityReport, require_permissible, validate

__all__ = [
    "SpectralPoint",
    "White",
    "GaussianDamped",
    "Tabulated",
    "NoiseSpectrum",
    "polynomial",
    "ldecay",
    "spd_static",
    "spd_lagged",
    "spd_spacetime",
    "susceptibility_spectral",
    "bochner_scan",
]


@dataclass(frozen=True)
class SpectralPoint:
    k: float
    omega: float = 0.0

    def __post_init__(self):
        if not self.k >= 0:
            raise InvalidParameterError(f"wavenumber must be >= 0, got {self.k!r}", "k")


@dataclass(frozen=True)
class White:
    """Spatially white driving noise, ``c(k) = 1``."""

    def __call__(self, k):
        return np.ones_like(np.asarray(k, dtype=float)) if np.ndim(k) else 1.0


@dataclass(frozen=True)
class GaussianDamped:
    """Noise with spatial spectral density ``exp(-k^2 a^2)``."""

    a: float

    def __post_init__(self):
        if not (self.a >= 0 and math.isfinite(self.a)):
            raise InvalidParameterError(f"noise correlation length must be >= 0, got {self.a!r}", "a")

    def __call__(self, k):
        return np.exp(-(np.asarray(k, dtype=float) * self.a) ** 2)


@dataclass(frozen=True)
class Tabulated:
    """Tabulated noise spectrum, linearly interpolated and clamped outside the table."""

    k: tuple[float, ...]
    values: tuple[float, ...]

    def __post_init__(self):
        k = np.asarray(self.k, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if k.ndim != 1 or k.shape != v.shape or k.size < 1:
            raise InvalidParameterError("tabulated noise needs matching 1-D k and value lists", "noise")
        if np.any(np.diff(k) <= 0):
            raise InvalidParameterError("tabulated noise k values must be strictly increasing", "noise")
        if np.any(v < 0) or not np.all(np.isfinite(v)):
            raise InvalidParameterError("tabulated noise spectrum must be finite and >= 0", "noise")

    def __call__(self, k):
        out = np.interp(k, self.k, self.values)
        return float(out) if np.ndim(k) == 0 else out


NoiseSpectrum = Union[White, GaussianDamped, Tabulated]


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def polynomial(params: ModelParams, k):
    """``P(k) = 1 + eta1 (k xi)^2 + mu (k xi)^4``."""
    x = (np.asarray(k, dtype=float) * params.xi) ** 2
    return _scalar_or_array(1.0 + params.eta1 * x + params.mu * x * x)


def ldecay(params: ModelParams, k):
    """Relaxation rate of Fourier mode k, ``L(k) = D~ P(k)`` (units 1/time)."""
    require_permissible(params)
    return _scalar_or_array(params.dtilde * np.asarray(polynomial(params, k)))


def spd_static(params: ModelParams, k):
    """Zero-lag spectral density ``eta0 xi^d / P(k)``."""
    require_permissible(params)
    return _scalar_or_array(params.eta0 * params.xi**params.d / np.asarray(polynomial(params, k)))


def spd_lagged(params: ModelParams, k, tau):
    """Spectral density at time lag tau, ``spd_static(k) exp(-L(k) |tau|)``."""
    require_permissible(params)
    p = np.asarray(polynomial(params, k))
    out = params.eta0 * params.xi**params.d / p * np.exp(-params.dtilde * p * np.abs(tau))
    return _scalar_or_array(out)


def spd_spacetime(params: ModelParams, k, omega):
    """Space-time spectrum ``2 eta0 xi^d D~ / (D~^2 P(k)^2 + omega^2)``."""
    require_permissible(params)
    p = np.asarray(polynomial(params, k))
    dt = params.dtilde
    out = 2.0 * params.eta0 * params.xi**params.d * dt / ((dt * p) ** 2 + np.asarray(omega, dtype=float) ** 2)
    return _scalar_or_array(out)


def susceptibility_spectral(params: ModelParams, k, tau):
    """
    Spectral susceptibility from the fluctuation-dissipation relation.

    ``chi~(k, tau) = (2/D) dC~/dtau = -(2/D) L(k) C~(k, tau)`` for ``tau > 0``.
    """
    if np.any(np.asarray(tau) <= 0):
        raise DomainError("the response function is causal: tau must be > 0")
    return _scalar_or_array(
        -2.0 / params.noise_d * np.asarray(ldecay(params, k)) * np.asarray(spd_lagged(params, k, tau)))


def _radial_mass(params, k_max, n):
    k = np.linspace(0.0, k_max, n)
    with np.errstate(divide="ignore"):
        f = k ** (params.d - 1) * np.asarray(spd_static(params, k))
    return float(np.trapezoid(f, k))


def bochner_scan(params: ModelParams, k_max: float, n: int) -> PermissibilityReport:
    """
    Numerical Bochner check on a wavenumber grid.

    Confirms the spectral density is nonnegative on ``[0, k_max]`` and decides
    whether ``int dk k^(d-1) spd_static(k)`` converges by comparing how much the
    truncated integral grows over ``[k_max/4, k_max/2]`` and ``[k_max/2, k_max]``:
    an integrand decaying like ``k^-s`` gives an increment ratio ``2^(1-s)``,
    so ratios >= 0.75 (s <= 1.4) are flagged divergent.
    """
    if n < 2:
        raise InvalidParameterError("bochner_scan needs n >= 2", "n")
    if not k_max > 0:
        raise InvalidParameterError("bochner_scan needs k_max > 0", "k_max")
    base = validate(params)
    k = np.linspace(0.0, k_max, n)
    poly = np.asarray(polynomial(params, k))
    positive = bool(np.all(poly > 0))
    messages = []
    if not positive:
        messages.append(f"spectral density changes sign on [0, {k_max}] (min P = {poly.min():.3g})")
        return PermissibilityReport(False, False, base.oscillatory, tuple(messages))
    i1 = _radial_mass(params, k_max / 4, max(n // 4, 2))
    i2 = _radial_mass(params, k_max / 2, max(n // 2, 2))
    i3 = _radial_mass(params, k_max, n)
    inc_lo, inc_hi = i2 - i1, i3 - i2
    ratio = inc_hi / inc_lo if inc_lo > 0 else math.inf
    finite = ratio < 0.75
    messages.append(
        f"radial spectral mass up to k_max: {i3:.6g}; growth ratio {ratio:.3f} -> "
        + ("converging" if finite else "divergent"))
    return PermissibilityReport(positive, finite, base.oscillatory, tuple(messages))
