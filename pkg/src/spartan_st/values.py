"""Small value types shared by the covariance, quadrature and simulation modules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import InvalidParameterError

__all__ = ["Lag", "CovValue", "QuadratureSpec", "METHODS"]

METHODS = (
    "closed_d1",
    "closed_d3",
    "zero_space",
    "zero_time",
    "univariate_integral",
    "small_mu_series",
    "spectral_quadrature",
    "colored_noise",
    "empirical",
)


@dataclass(frozen=True)
class Lag:
    """Spatial lag magnitude ``r >= 0`` and time lag ``tau`` (any sign)."""

    r: float
    tau: float = 0.0

    def __post_init__(self):
        if not (self.r >= 0 and math.isfinite(self.r)):
            raise InvalidParameterError(f"spatial lag must be finite and >= 0, got {self.r!r}", "r")
        if not math.isfinite(self.tau):
            raise InvalidParameterError(f"time lag must be finite, got {self.tau!r}", "tau")


@dataclass(frozen=True)
class CovValue:
    value: float
    method: str
    est_error: float | None = None
    warnings: tuple[str, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"unknown method tag {self.method!r}")
        if self.est_error is not None and not self.est_error >= 0:
            raise ValueError(f"est_error must be >= 0, got {self.est_error!r}")

    def __float__(self):
        return float(self.value)


@dataclass(frozen=True)
class QuadratureSpec:
    """
    Numerical policy for spectral integrals.

    Parameters
    ----------
    k_cut : float, default: 100.0
        nominal spectral cutoff; the integral is continued past it whenever
        the analytic tail bound exceeds ``rel_tol`` times the result
    rel_tol : float, default: 1e-9
        target relative error
    max_subdiv : int, default: 2000
        cap on adaptive subdivisions per call and on oscillation panels
    scheme : {"oscillatory_partition", "adaptive_gk"}
        ``adaptive_gk`` forces plain adaptive Gauss-Kronrod over ``[0, inf)``
    """

    k_cut: float = 100.0
    rel_tol: float = 1e-9
    max_subdiv: int = 2000
    scheme: str = "oscillatory_partition"

    def __post_init__(self):
        if not self.k_cut > 0:
            raise InvalidParameterError(f"k_cut must be > 0, got {self.k_cut!r}", "k_cut")
        if not 0 < self.rel_tol < 1:
            raise InvalidParameterError(f"rel_tol must be in (0, 1), got {self.rel_tol!r}", "rel_tol")
        if self.max_subdiv < 10:
            raise InvalidParameterError("max_subdiv must be >= 10", "max_subdiv")
        if self.scheme not in ("adaptive_gk", "oscillatory_partition"):
            raise InvalidParameterError(f"unknown quadrature scheme {self.scheme!r}", "scheme")
