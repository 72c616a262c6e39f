"""
Self-verification checks shared by ``spartan-st verify`` and the test suite.

Each check returns a :class:`CheckResult` with the measured error and the
tolerance it was held to. Tolerances can be overridden by name, which is how
the harness demonstrates that it detects a deliberately impossible target.
"""

from __future__ import annotations

import io
import math
import time
from contextlib import redirect_stdout
from dataclasses import dataclass, field
from pathlib import Path
import tempfile

import numpy as np
from scipy import integrate, stats

from .covariance import (cov_closed_d1, cov_closed_d3, cov_small_mu, cov_univariate_integral,
                         cov_zero_space, cov_zero_time)
from .model import ModelParams
from .quadrature import cov_spectral_numeric
from .simulate import (GridSpec, constraint_stats, empirical_cov, expected_constraints, field_modes,
                       mode_spectrum, simulate)
from .spectral import ldecay, spd_lagged, spd_spacetime, spd_static, susceptibility_spectral
from .values import Lag, QuadratureSpec

__all__ = ["CheckResult", "DEFAULT_TOLERANCES", "INFORMATIONAL", "reference_params", "run_checks",
           "overall_pass", "CHECKS"]

EULER_GAMMA = 0.5772156649015329

DEFAULT_TOLERANCES = {
    "closed_vs_quadrature_d1": 1e-8,
    "closed_vs_quadrature_d3": 1e-8,
    "triple_representation": 1e-7,
    "limit_zero_space": 1e-12,
    "limit_zero_time": 1e-10,
    "small_mu_0": 1e-10,
    "small_mu_0.01": 1e-4,
    "small_mu_0.05": 1e-3,
    "spectrum_balance": 4 * np.finfo(float).eps,
    "spectrum_frequency_integral": 1e-6,
    "fluctuation_dissipation": 1e-6,
    "singularity_d3": 1e-4,
    "singularity_d2_log": 1e-2,
    "singularity_d2_asymptote": 1e-2,
    "oscillation": 0.0,
    "monte_carlo_sigmas": 3.0,
    "mode_autocorrelation_p": 0.01,
    "constraint_sigmas": 3.0,
}


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    measured: float
    tolerance: float
    seconds: float = 0.0
    detail: dict = field(default_factory=dict)

    def line(self):
        status = "PASS" if self.passed else "FAIL"
        return f"[{status}] {self.name}: measured {self.measured:.3e} (tolerance {self.tolerance:.3e})"

    def as_dict(self):
        return {"name": self.name, "passed": bool(self.passed), "measured": float(self.measured),
                "tolerance": self.tolerance, "seconds": self.seconds, "detail": self.detail}


def reference_params(d=1, mu=0.0):
    """``eta0 = 1, eta1 = 1, xi = 3, D~ = 1``: the parameter set used throughout the checks."""
    return ModelParams.from_dtilde(d, 1.0, 1.0, 3.0, 1.0, mu=mu)


def _rel(a, b, floor=1e-12):
    return abs(a - b) / max(abs(b), floor)


def _lag_grid(params, count=10):
    rs = np.linspace(0.0, 6.0 * params.xi, count)
    taus = np.linspace(0.0, 6.0 / params.dtilde, count)
    return rs, taus


def _timed(name, tol, func):
    start = time.perf_counter()
    measured, detail, passed = func()
    if passed is None:
        passed = bool(measured <= tol)
    return CheckResult(name, bool(passed), float(measured), float(tol), time.perf_counter() - start, detail)


def _zero_curvature(params):
    return params.with_(mu=0.0) if params.eta1 > 0 else reference_params(params.d)


def check_closed_vs_quadrature(params, d, tol, quad=None):
    """Max relative gap between the explicit form and the spectral quadrature on a 10 x 10 lag grid."""
    p = _zero_curvature(params).with_(d=d, dtilde=params.dtilde if params.eta1 > 0 else 1.0)
    closed = cov_closed_d1 if d == 1 else cov_closed_d3
    quad = quad or QuadratureSpec(rel_tol=1e-11)

    def run():
        rs, taus = _lag_grid(p)
        worst = 0.0
        for r in rs:
            r = max(r, 0.1) if d == 3 else r
            for tau in taus:
                lag = Lag(float(r), float(tau))
                worst = max(worst, _rel(closed(p, lag).value, cov_spectral_numeric(p, lag, quad).value))
        return worst, {"d": d, "params": p.as_dict()}, None

    return _timed(f"closed_vs_quadrature_d{d}", tol, run)


def check_triple_representation(params, tol, quad=None):
    """Univariate integral, explicit form and spectral quadrature agree on the shared domain (d = 1, 3)."""
    base = _zero_curvature(params)
    quad = quad or QuadratureSpec(rel_tol=1e-11)

    def run():
        worst = 0.0
        for d in (1, 3):
            p = base.with_(d=d, dtilde=base.dtilde if params.eta1 > 0 else 1.0)
            closed = cov_closed_d1 if d == 1 else cov_closed_d3
            rs, taus = _lag_grid(p, 6)
            for r in rs:
                r = max(r, 0.1) if d == 3 else r
                for tau in taus:
                    lag = Lag(float(r), float(tau))
                    a = closed(p, lag).value
                    b = cov_univariate_integral(p, lag, quad).value
                    c = cov_spectral_numeric(p, lag, quad).value
                    worst = max(worst, _rel(b, a), _rel(c, a), _rel(b, c))
        return worst, {}, None

    return _timed("triple_representation", tol, run)


def check_limits(params, tol_space, tol_time):
    """The explicit forms reduce to the zero-lag formulas at ``r = 0`` and ``tau = 0``."""
    p = _zero_curvature(params)

    def run_space():
        q = p.with_(d=1, dtilde=p.dtilde)
        taus = np.linspace(0.0, 6.0 / q.dtilde, 61)
        worst = max(abs(cov_closed_d1(q, Lag(0.0, float(t))).value - cov_zero_space(q, float(t)).value)
                    for t in taus)
        return worst, {}, None

    def run_time():
        worst = 0.0
        for d, closed in ((1, cov_closed_d1), (3, cov_closed_d3)):
            q = p.with_(d=d, dtilde=p.dtilde)
            for r in np.linspace(0.1, 6.0 * q.xi, 60):
                worst = max(worst, abs(closed(q, Lag(float(r), 0.0)).value - cov_zero_time(q, float(r)).value))
        return worst, {}, None

    return [_timed("limit_zero_space", tol_space, run_space),
            _timed("limit_zero_time", tol_time, run_time)]


def check_small_mu(tols, lag=Lag(1.0, 0.5), M=2):
    """Truncated small-curvature series against the quadrature oracle at ``mu = 0, 0.01, 0.05``."""
    quad = QuadratureSpec(rel_tol=1e-12)
    out = []
    for mu in (0.0, 0.01, 0.05):
        name = f"small_mu_{mu:g}"
        p = reference_params(1, mu)

        def run(p=p):
            approx = cov_small_mu(p, lag, M, quad).value
            exact = cov_spectral_numeric(p, lag, quad).value
            return _rel(approx, exact), {"series": approx, "oracle": exact, "M": M}, None

        out.append(_timed(name, tols[name], run))
    return out


def check_spectrum_identities(params, tol_balance, tol_freq, tol_fdt):
    """Stationary balance ``2 L C~ = D``, frequency marginal of ``S(k, w)``, and the response relation."""
    k = np.linspace(0.0, 5.0 / params.xi, 100)

    def balance():
        lhs = np.asarray(spd_static(params, k)) * 2.0 * np.asarray(ldecay(params, k))
        worst = float(np.max(np.abs(lhs / params.noise_d - 1.0)))
        return worst, {}, None

    def frequency():
        worst = 0.0
        for kk in k[::10]:
            val, _ = integrate.quad(lambda w: spd_spacetime(params, kk, w), -np.inf, np.inf,
                                    epsabs=0.0, epsrel=1e-12, limit=400)
            worst = max(worst, _rel(val / (2.0 * math.pi), spd_static(params, kk)))
        return worst, {}, None

    def fdt():
        worst = 0.0
        for tau in (0.1, 0.5, 2.0):
            tau = tau / params.dtilde
            for kk in k[::10]:
                # fourth-order central difference with a step matched to the decay rate
                h = 1e-3 / float(ldecay(params, kk))
                c = [float(spd_lagged(params, kk, tau + j * h)) for j in (-2, -1, 1, 2)]
                deriv = (c[0] - 8.0 * c[1] + 8.0 * c[2] - c[3]) / (12.0 * h)
                response = params.noise_d * susceptibility_spectral(params, kk, tau) / 2.0
                worst = max(worst, _rel(response, deriv, 1e-300))
        return worst, {}, None

    return [_timed("spectrum_balance", tol_balance, balance),
            _timed("spectrum_frequency_integral", tol_freq, frequency),
            _timed("fluctuation_dissipation", tol_fdt, fdt)]


def check_singularities(params, tol_d3, tol_d2, tol_d2_asym):
    """
    Small-lag behaviour for ``mu = 0``: ``r C(r, 0)`` in d=3 and the logarithmic
    divergence of ``C(0, tau)`` in d=2.

    ``singularity_d2_log`` compares with ``-ln tau`` alone; it converges
    only like ``gamma / ln tau``. ``singularity_d2_asymptote`` includes Euler's
    constant: ``C(0, tau) ~ eta0 / (4 pi eta1) (-ln(D~ tau) - gamma)``.
    """
    p = _zero_curvature(params)

    def d3():
        q = p.with_(d=3, dtilde=p.dtilde)
        r = 1e-4 * q.xi
        target = q.eta0 * q.xi / (4.0 * math.pi * q.eta1)
        return _rel(r * cov_zero_time(q, r).value, target), {"r": r}, None

    q2 = p.with_(d=2, dtilde=p.dtilde)
    tau = 1e-6 / q2.dtilde
    amp = q2.eta0 / (4.0 * math.pi * q2.eta1)

    def d2_log():
        value = cov_zero_space(q2, tau).value
        return _rel(value / -math.log(tau), amp), {"tau": tau, "ratio": value / -math.log(tau) / amp}, None

    def d2_asym():
        value = cov_zero_space(q2, tau).value
        return _rel(value, amp * (-math.log(q2.dtilde * tau) - EULER_GAMMA)), {"tau": tau}, None

    return [_timed("singularity_d3", tol_d3, d3),
            _timed("singularity_d2_log", tol_d2, d2_log),
            _timed("singularity_d2_asymptote", tol_d2_asym, d2_asym)]


def check_oscillation(params, tol=0.0):
    """Minimum of ``C(r, 0)`` over ``r in (0, 20 xi]`` is negative for ``eta1 < 0 < mu``."""
    if not (params.mu > 0 and params.eta1 < 0):
        params = ModelParams.from_dtilde(1, params.eta0, -1.0, params.xi, params.dtilde, mu=1.0)
    p = params.with_(d=1, dtilde=params.dtilde)

    def run():
        rs = np.linspace(20.0 * p.xi / 400, 20.0 * p.xi, 400)
        values = [cov_spectral_numeric(p, Lag(float(r), 0.0)).value for r in rs]
        i = int(np.argmin(values))
        # passes when the minimum is strictly below -tol
        return values[i], {"r_min": float(rs[i]), "params": p.as_dict()}, values[i] < -tol

    return _timed("oscillation", tol, run)


def check_monte_carlo(tols, seeds=200, n=1024, spacing=0.5, t_end=4.0, dt=0.25, r=3.0, tau=1.0,
                      n_modes=48):
    """
    Langevin simulation against the analytic model (d=1, reference parameters).

    Sample variance (t=0 snapshot) and ``C(r, tau)`` are compared with the closed
    form in units of the across-seed standard error; the mode autocorrelation
    at lag ``tau`` is tested with a chi-square statistic over ``n_modes`` modes.
    """
    p = reference_params(1)
    grid = GridSpec(n=n, spacing=spacing, d=1)
    spec = mode_spectrum(p, grid)
    lag_steps = round(tau / dt)
    modes = np.arange(1, n_modes + 1)

    def run():
        var, cov, auto = [], [], []
        for seed in range(seeds):
            f = simulate(p, grid, t_end, dt, seed)
            var.append(float(np.mean(f.values[0] ** 2)))
            cov.append(empirical_cov(f, [r], [tau])[(r, tau)].value)
            x = field_modes(f)[:, modes]
            prod = np.real(x[:-lag_steps] * np.conj(x[lag_steps:])).mean(axis=0)
            auto.append(prod / spec.sigma2[modes])
        var, cov, auto = np.array(var), np.array(cov), np.array(auto)
        se = np.std(np.column_stack([var, cov, auto]), ddof=1, axis=0) / math.sqrt(seeds)
        z_var = (var.mean() - cov_closed_d1(p, Lag(0.0, 0.0)).value) / se[0]
        z_cov = (cov.mean() - cov_closed_d1(p, Lag(r, tau)).value) / se[1]
        z_modes = (auto.mean(axis=0) - np.exp(-spec.rate[modes] * tau)) / se[2:]
        chi2 = float(np.sum(z_modes**2))
        p_value = float(stats.chi2.sf(chi2, df=n_modes))
        return z_var, z_cov, chi2, p_value

    start = time.perf_counter()
    z_var, z_cov, chi2, p_value = run()
    elapsed = time.perf_counter() - start
    sig = tols["monte_carlo_sigmas"]
    return [
        CheckResult("monte_carlo_variance", abs(z_var) <= sig, abs(z_var), sig, elapsed, {"seeds": seeds}),
        CheckResult("monte_carlo_covariance", abs(z_cov) <= sig, abs(z_cov), sig, 0.0, {"r": r, "tau": tau}),
        CheckResult("mode_autocorrelation", p_value > tols["mode_autocorrelation_p"], p_value,
                    tols["mode_autocorrelation_p"], 0.0, {"chi2": chi2, "df": n_modes}),
    ]


def check_constraints(tols, seeds=500, n=1024, spacing=0.5):
    """Ensemble means of the constraint statistics against their grid-spectral expectations."""
    p = reference_params(1)
    grid = GridSpec(n=n, spacing=spacing, d=1)

    def run():
        samples = np.array([constraint_stats(simulate(p, grid, 0.0, 1.0, seed), 0).as_tuple()
                            for seed in range(seeds)])
        expected = np.array(expected_constraints(p, grid).as_tuple())
        z = (samples.mean(axis=0) - expected) / (samples.std(axis=0, ddof=1) / math.sqrt(seeds))
        return float(np.max(np.abs(z))), {"z": [float(v) for v in z]}, None

    return _timed("constraint_expectations", tols["constraint_sigmas"], run)


def check_determinism(thread_counts=(1, 2, 4)):
    """Repeated ``simulate`` command runs with different thread counts write identical bytes."""
    from .cli import main

    def run():
        digests = []
        with tempfile.TemporaryDirectory() as tmp:
            for i, threads in enumerate(thread_counts):
                run_dir = Path(tmp) / f"run{i}"
                run_dir.mkdir()
                out = run_dir / "field.sstf"
                with redirect_stdout(io.StringIO()):
                    code = main(["simulate", "--n", "256", "--spacing", "0.5", "--t-end", "2", "--dt", "0.5",
                                 "--seed", "7", "--threads", str(threads), "--out", str(out)])
                if code != 0:
                    return float("inf"), {"exit_code": code}, False
                digests.append(tuple((p.name, p.read_bytes()) for p in sorted(run_dir.iterdir())))
        mismatches = sum(d != digests[0] for d in digests[1:])
        return float(mismatches), {"threads": list(thread_counts)}, mismatches == 0

    return _timed("determinism", 0.0, run)


CHECKS = ("analytic", "monte_carlo", "determinism")

# reported but excluded from the overall verdict: the ratio C(0, tau) / (-ln tau)
# approaches its limit only like gamma / ln tau, about 4 % at tau = 1e-6
INFORMATIONAL = frozenset({"singularity_d2_log"})


def overall_pass(results):
    """True when every check outside :data:`INFORMATIONAL` passed."""
    return all(r.passed for r in results if r.name not in INFORMATIONAL)


def run_checks(params=None, tolerances=None, mc_seeds=200, constraint_seeds=500, include=CHECKS):
    """
    Run the verification suite.

    Parameters
    ----------
    params : ModelParams, optional
        base parameters; defaults to :func:`reference_params`. Checks that need
        ``mu = 0`` use the zero-curvature version, and the oscillation check
        uses ``eta1 = -1, mu = 1`` unless ``params`` already oscillate
    tolerances : dict, optional
        overrides of :data:`DEFAULT_TOLERANCES` by check name
    mc_seeds, constraint_seeds : int
        ensemble sizes of the Monte-Carlo checks
    include : iterable of {"analytic", "monte_carlo", "determinism"}

    Returns
    -------
    list of CheckResult
    """
    params = params or reference_params()
    tol = dict(DEFAULT_TOLERANCES)
    unknown = set(tolerances or {}) - set(tol)
    if unknown:
        raise KeyError(f"unknown check tolerance(s): {', '.join(sorted(unknown))}")
    tol.update(tolerances or {})
    results = []
    if "analytic" in include:
        results.append(check_closed_vs_quadrature(params, 1, tol["closed_vs_quadrature_d1"]))
        results.append(check_closed_vs_quadrature(params, 3, tol["closed_vs_quadrature_d3"]))
        results.append(check_triple_representation(params, tol["triple_representation"]))
        results.extend(check_limits(params, tol["limit_zero_space"], tol["limit_zero_time"]))
        results.extend(check_small_mu(tol))
        results.extend(check_spectrum_identities(params, tol["spectrum_balance"],
                                                 tol["spectrum_frequency_integral"],
                                                 tol["fluctuation_dissipation"]))
        results.extend(check_singularities(params, tol["singularity_d3"], tol["singularity_d2_log"],
                                           tol["singularity_d2_asymptote"]))
        results.append(check_oscillation(params, tol["oscillation"]))
    if "monte_carlo" in include:
        results.extend(check_monte_carlo(tol, seeds=mc_seeds))
        results.append(check_constraints(tol, seeds=constraint_seeds))
    if "determinism" in include:
        results.append(check_determinism())
    return results
