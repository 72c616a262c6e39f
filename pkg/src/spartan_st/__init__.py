"""
Space-time covariances of Spartan spatial random fields driven by Langevin dynamics.

Closed forms, spectral quadrature, a small-curvature series, an exact
Fourier-mode Langevin simulator and a verification suite.
"""

from .covariance import (cov_closed_d1, cov_closed_d3, cov_small_mu, cov_univariate_integral,
                         cov_zero_space, cov_zero_time)
from .errors import (AccuracyError, DomainError, EstimationError, InvalidParameterError, SingularityError,
                     SSRFError, WrongMethodError)
from .model import DerivedConstants, ModelParams, PermissibilityReport, derived, require_permissible, validate
from .quadrature import cov_colored_noise, cov_spectral_numeric, tail_bound
from .simulate import (ConstraintStats, FieldGrid, GridSpec, constraint_stats, empirical_cov,
                       expected_constraints, read_field, simulate, write_field)
from .spectral import (GaussianDamped, SpectralPoint, Tabulated, White, bochner_scan, ldecay, spd_lagged,
                       spd_spacetime, spd_static, susceptibility_spectral)
from .values import CovValue, Lag, QuadratureSpec

__version__ = "0.1.0"

__all__ = [
    "ModelParams", "DerivedConstants", "PermissibilityReport", "validate", "derived", "require_permissible",
    "Lag", "CovValue", "QuadratureSpec", "SpectralPoint",
    "White", "GaussianDamped", "Tabulated",
    "spd_static", "spd_lagged", "spd_spacetime", "ldecay", "susceptibility_spectral", "bochner_scan",
    "cov_closed_d1", "cov_closed_d3", "cov_zero_space", "cov_zero_time", "cov_univariate_integral",
    "cov_small_mu", "cov_spectral_numeric", "cov_colored_noise", "tail_bound",
    "GridSpec", "FieldGrid", "ConstraintStats", "simulate", "empirical_cov", "constraint_stats",
    "expected_constraints", "write_field", "read_field",
    "SSRFError", "InvalidParameterError", "WrongMethodError", "DomainError", "SingularityError",
    "AccuracyError", "EstimationError",
]
