"""
Parameter container for the Spartan space-time model.

The static part of the model is the Spartan energy functional with scale
``eta0``, rigidity ``eta1``, characteristic length ``xi`` and curvature
coefficient ``mu``. Dynamics are driven by white noise of variance
``noise_d`` (D); the relaxation rate of the k=0 mode is the combined
diffusion coefficient ``D~ = D / (2 xi^d eta0)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .errors import InvalidParameterError

__all__ = [
    "ModelParams",
    "DerivedConstants",
    "PermissibilityReport",
    "validate",
    "derived",
    "require_permissible",
]


@dataclass(frozen=True)
class ModelParams:
    """
    Spartan space-time model parameters.

    Parameters
    ----------
    d : int
        spatial dimension, one of 1, 2, 3
    eta0 : float
        scale coefficient (> 0), units of the field squared
    eta1 : float
        dimensionless rigidity coefficient, may be negative when ``mu > 0``
    xi : float
        characteristic length (> 0)
    mu : float, default: 0.0
        dimensionless curvature coefficient (>= 0)
    noise_d : float, default: 1.0
        variance D of the driving white noise (> 0)
    """

    d: int
    eta0: float
    eta1: float
    xi: float
    mu: float = 0.0
    noise_d: float = 1.0

    @classmethod
    def from_dtilde(cls, d, eta0, eta1, xi, dtilde, mu=0.0):
        """Build parameters from D~ instead of D, using D = 2 xi^d eta0 D~."""
        return cls(d=d, eta0=eta0, eta1=eta1, xi=xi, mu=mu,
                   noise_d=2.0 * xi**d * eta0 * dtilde)

    @property
    def dtilde(self):
        return self.noise_d / (2.0 * self.xi**self.d * self.eta0)

    def with_(self, **changes):
        """Copy with some fields replaced (``dtilde`` is accepted and mapped to D)."""
        if "dtilde" in changes:
            dt = changes.pop("dtilde")
            p = replace(self, **changes)
            return replace(p, noise_d=2.0 * p.xi**p.d * p.eta0 * dt)
        return replace(self, **changes)

    def as_dict(self):
        return {"d": self.d, "eta0": self.eta0, "eta1": self.eta1,
                "xi": self.xi, "mu": self.mu, "noise_d": self.noise_d}


@dataclass(frozen=True)
class DerivedConstants:
    """Derived constants; ``beta1`` depends on the time lag and is a method."""

    dtilde: float
    beta0: float
    beta2: float
    eta1_xi2: float

    def beta1(self, tau):
        return self.dtilde * abs(tau) * self.eta1_xi2


@dataclass(frozen=True)
class PermissibilityReport:
    spectrally_positive: bool
    finite_variance: bool
    oscillatory: bool
    messages: tuple[str, ...] = field(default_factory=tuple)

    @property
    def ok(self):
        return self.spectrally_positive


def _check_finite(params):
    for name in ("eta0", "eta1", "xi", "mu", "noise_d"):
        value = getattr(params, name)
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise InvalidParameterError(f"{name} must be a real number, got {value!r}", name)
        if not math.isfinite(value):
            raise InvalidParameterError(f"{name} must be finite, got {value!r}", name)
    if params.d not in (1, 2, 3) or isinstance(params.d, bool):
        raise InvalidParameterError(f"d must be 1, 2 or 3, got {params.d!r}", "d")
    for name in ("eta0", "xi", "noise_d"):
        if getattr(params, name) <= 0:
            raise InvalidParameterError(f"{name} must be > 0, got {getattr(params, name)!r}", name)
    if params.mu < 0:
        raise InvalidParameterError(f"mu must be >= 0, got {params.mu!r}", "mu")


def validate(params: ModelParams) -> PermissibilityReport:
    """
    Classify a parameter set.

    The spectral density is proportional to ``1 / (1 + eta1 x + mu x^2)`` with
    ``x = (k xi)^2 >= 0``. For ``mu = 0`` it is positive iff ``eta1 > 0``; for
    ``mu > 0`` the quadratic has no nonnegative root iff ``eta1 > -2 sqrt(mu)``.
    The double-root boundary ``eta1 = -2 sqrt(mu)`` is rejected (non-integrable
    pole).

    Raises
    ------
    InvalidParameterError
        if a field is non-finite or out of range; ``field`` names the culprit
    """
    _check_finite(params)
    mu, eta1, d = params.mu, params.eta1, params.d
    messages = []
    if mu == 0:
        positive = eta1 > 0
        if not positive:
            messages.append("mu = 0 requires eta1 > 0 for a nonnegative spectral density")
    else:
        positive = eta1 > -2.0 * math.sqrt(mu)
        if not positive:
            messages.append("mu > 0 requires eta1 > -2 sqrt(mu); the spectral density has a pole")
    finite = mu > 0 or d == 1
    if not finite:
        messages.append(
            f"mu = 0 in d = {d}: the variance diverges, C(0,0) is infinite without a cutoff")
    oscillatory = positive and mu > 0 and eta1 < 0
    if oscillatory:
        messages.append("-2 sqrt(mu) < eta1 < 0: the covariance oscillates (negative lobes)")
    return PermissibilityReport(positive, finite, oscillatory, tuple(messages))


def require_permissible(params):
    report = validate(params)
    if not report.spectrally_positive:
        raise InvalidParameterError("; ".join(report.messages), "eta1")
    return report


def derived(params: ModelParams) -> DerivedConstants:
    """D~ and the beta coefficients of the univariate covariance integral."""
    validate(params)
    xid = params.xi**params.d
    beta0 = 1.0 / (params.eta0 * xid)
    eta1_xi2 = params.eta1 * params.xi**2
    return DerivedConstants(
        dtilde=params.noise_d / (2.0 * xid * params.eta0),
        beta0=beta0,
        beta2=eta1_xi2 * beta0,
        eta1_xi2=eta1_xi2,
    )
