"""
Command-line interface: ``spartan-st {eval, spectrum, simulate, verify}``.

Options can also come from a plain ``key=value`` file given with ``--config``
(keys are the long option names without dashes, e.g. ``r-grid = 0:6:10``);
command-line flags take precedence over the file.

Exit codes: 0 ok, 2 invalid parameters, 3 singular configuration,
4 accuracy failure, 5 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from ._fileio import atomic_write
from .covariance import (cov_closed_d1, cov_closed_d3, cov_small_mu, cov_univariate_integral,
                         cov_zero_space, cov_zero_time)
from .errors import InvalidParameterError, SSRFError, WrongMethodError
from .model import ModelParams, validate
from .quadrature import cov_spectral_numeric
from .simulate import GridSpec, constraint_stats, empirical_cov, expected_constraints, simulate, write_field
from .spectral import spd_spacetime
from .values import Lag, QuadratureSpec
from .verification import DEFAULT_TOLERANCES, INFORMATIONAL, overall_pass, run_checks

EXIT_OK = 0
EXIT_VERIFY = 5

METHOD_CHOICES = ("auto", "closed_d1", "closed_d3", "zero_space", "zero_time",
                  "univariate_integral", "small_mu_series", "spectral_quadrature")


def parse_grid(text):
    """``min:max:count[:lin|log]`` -> 1-D array."""
    parts = text.split(":")
    if len(parts) not in (3, 4):
        raise argparse.ArgumentTypeError(f"grid must be min:max:count[:lin|log], got {text!r}")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse grid {text!r}") from None
    scale = parts[3] if len(parts) == 4 else "lin"
    if count < 1:
        raise argparse.ArgumentTypeError("grid count must be >= 1")
    if not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo:
        raise argparse.ArgumentTypeError(f"grid bounds must be finite with min <= max, got {text!r}")
    if scale == "lin":
        return np.linspace(lo, hi, count)
    if scale == "log":
        if lo <= 0:
            raise argparse.ArgumentTypeError("log grids need min > 0")
        return np.geomspace(lo, hi, count)
    raise argparse.ArgumentTypeError(f"grid scale must be lin or log, got {scale!r}")


def _tolerance_override(text):
    name, sep, value = text.partition("=")
    if not sep or name not in DEFAULT_TOLERANCES:
        raise argparse.ArgumentTypeError(
            f"expected NAME=VALUE with NAME one of {', '.join(DEFAULT_TOLERANCES)}")
    return name, float(value)


# (flag, options) per option group; defaults are the reference parameter set
MODEL_OPTIONS = [
    ("--d", dict(type=int, default=1, choices=(1, 2, 3), help="spatial dimension")),
    ("--eta0", dict(type=float, default=1.0, help="scale coefficient")),
    ("--eta1", dict(type=float, default=1.0, help="rigidity coefficient")),
    ("--xi", dict(type=float, default=3.0, help="characteristic length")),
    ("--mu", dict(type=float, default=0.0, help="curvature coefficient")),
    ("--noise-d", dict(type=float, default=None, help="noise variance D (exclusive with --dtilde)")),
    ("--dtilde", dict(type=float, default=None,
                      help="combined diffusion coefficient D~ = D / (2 xi^d eta0); default 1")),
]
QUAD_OPTIONS = [
    ("--kcut", dict(type=float, default=100.0, help="nominal spectral cutoff")),
    ("--rel-tol", dict(type=float, default=1e-9, help="quadrature relative tolerance")),
    ("--scheme", dict(default="oscillatory_partition", choices=("oscillatory_partition", "adaptive_gk"))),
]
OUTPUT_OPTIONS = [
    ("--format", dict(default="csv", choices=("csv", "json"))),
    ("--out", dict(default="-", help="output path, '-' for stdout")),
]
COMMAND_OPTIONS = {
    "eval": [
        ("--r-grid", dict(type=parse_grid, default="0:18:10", help="spatial lags min:max:count[:log]")),
        ("--tau-grid", dict(type=parse_grid, default="0:6:10", help="time lags min:max:count[:log]")),
        ("--method", dict(default="auto", choices=METHOD_CHOICES)),
        ("--order", dict(type=int, default=2, help="small-mu truncation order M (2M + 1 terms)")),
    ],
    "spectrum": [
        ("--k-grid", dict(type=parse_grid, default="0:2:41", help="wavenumbers")),
        ("--omega-grid", dict(type=parse_grid, default="-2:2:41", help="angular frequencies")),
    ],
    "simulate": [
        ("--n", dict(type=int, default=1024, help="grid points per axis (power of two)")),
        ("--spacing", dict(type=float, default=0.5, help="grid step")),
        ("--dt", dict(type=float, default=0.25, help="sampling interval")),
        ("--t-end", dict(type=float, default=4.0, help="last sample time")),
        ("--seed", dict(type=int, default=0)),
        ("--threads", dict(type=int, default=1, help="noise-generation threads (output is unchanged)")),
        ("--summary", dict(default=None, help="summary JSON path (default: <out>.summary.json)")),
    ],
    "verify": [
        ("--check-tol", dict(type=_tolerance_override, action="append", default=[],
                             metavar="NAME=VALUE", help="override one check tolerance")),
        ("--mc-seeds", dict(type=int, default=200, help="Monte-Carlo ensemble size")),
        ("--constraint-seeds", dict(type=int, default=500, help="ensemble size of the constraint check")),
        ("--skip-monte-carlo", dict(action="store_true")),
        ("--out", dict(default="-", help="report JSON path, '-' for stdout")),
    ],
}
COMMAND_GROUPS = {
    "eval": (MODEL_OPTIONS, QUAD_OPTIONS, OUTPUT_OPTIONS),
    "spectrum": (MODEL_OPTIONS, OUTPUT_OPTIONS),
    "simulate": (MODEL_OPTIONS,),
    "verify": (MODEL_OPTIONS,),
}


def _dest(flag):
    return flag.lstrip("-").replace("-", "_")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="spartan-st", description="Spartan space-time covariance tables, spectra and simulations")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {"eval": "tabulate C(r, tau)", "spectrum": "tabulate S(k, omega)",
             "simulate": "run the Langevin simulator", "verify": "run the verification suite"}
    for name, groups in COMMAND_GROUPS.items():
        p = sub.add_parser(name, help=helps[name], argument_default=argparse.SUPPRESS)
        p.add_argument("--config", help="key=value file; flags override it")
        for options in groups + (COMMAND_OPTIONS[name],):
            for flag, kw in options:
                kw = {k: v for k, v in kw.items() if k != "default"}
                p.add_argument(flag, **kw)
        if name == "simulate":
            p.add_argument("--out", help="SSTF1 output path (default field.sstf)")
    return parser


def _option_table(command):
    table = {}
    for options in COMMAND_GROUPS[command] + (COMMAND_OPTIONS[command],):
        for flag, kw in options:
            table[_dest(flag)] = (flag, kw)
    if command == "simulate":
        table["out"] = ("--out", dict(default="field.sstf"))
    return table


def read_config(path):
    values = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise InvalidParameterError(f"{path}:{lineno}: expected key=value", "config")
        values[_dest(key.strip())] = value.strip()
    return values


def _convert(flag, kw, raw):
    conv = kw.get("type", str)
    try:
        value = conv(raw)
    except (argparse.ArgumentTypeError, ValueError) as exc:
        raise InvalidParameterError(f"config value for {flag}: {exc}", _dest(flag)) from None
    if "choices" in kw and value not in kw["choices"]:
        raise InvalidParameterError(f"config value for {flag} must be one of {kw['choices']}", _dest(flag))
    return value


def resolve_options(args):
    """Merge flags over the config file over built-in defaults into a plain namespace."""
    table = _option_table(args.command)
    given = vars(args)
    config = read_config(given["config"]) if given.get("config") else {}
    unknown = set(config) - set(table)
    if unknown:
        raise InvalidParameterError(f"unknown config key(s): {', '.join(sorted(unknown))}", "config")
    if config.get("check_tol"):
        config["check_tol"] = [_convert("--check-tol", {"type": _tolerance_override}, item.strip())
                               for item in config["check_tol"].split(",")]
    merged = {}
    for dest, (flag, kw) in table.items():
        if dest in given:
            merged[dest] = given[dest]
        elif dest in config:
            merged[dest] = config[dest] if dest == "check_tol" else _convert(flag, kw, config[dest])
        else:
            default = kw.get("default")
            merged[dest] = _convert(flag, kw, default) if isinstance(default, str) and "type" in kw else default
    # noise strength: command line beats the file, and D and D~ are exclusive at each level
    cli_noise = [k for k in ("noise_d", "dtilde") if k in given]
    file_noise = [k for k in ("noise_d", "dtilde") if k in config]
    if len(cli_noise) == 2 or (not cli_noise and len(file_noise) == 2):
        raise InvalidParameterError("--noise-d and --dtilde are mutually exclusive", "noise_d")
    chosen = (cli_noise or file_noise or ["dtilde"])[0]
    other = "dtilde" if chosen == "noise_d" else "noise_d"
    merged[other] = None
    if merged[chosen] is None:
        merged[chosen] = 1.0
    merged["command"] = args.command
    return argparse.Namespace(**merged)


def params_from(opts):
    if opts.dtilde is not None:
        params = ModelParams.from_dtilde(opts.d, opts.eta0, opts.eta1, opts.xi, opts.dtilde, mu=opts.mu)
    else:
        params = ModelParams(d=opts.d, eta0=opts.eta0, eta1=opts.eta1, xi=opts.xi, mu=opts.mu,
                             noise_d=opts.noise_d)
    validate(params)
    return params


def _fmt(x):
    return "" if x is None else f"{x:.17g}"


def _emit(text, out):
    if out == "-":
        sys.stdout.write(text)
    else:
        atomic_write(out, text)


def _table(rows, header, fmt):
    if fmt == "json":
        return json.dumps([dict(zip(header, row)) for row in rows], indent=1) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) if isinstance(v, float) or v is None else v for v in row])
    return buf.getvalue()


def select_method(params, method):
    """``auto`` is the explicit d=1 form when it applies, otherwise the spectral quadrature."""
    if method == "auto":
        return "closed_d1" if params.d == 1 and params.mu == 0 else "spectral_quadrature"
    return method


def _evaluator(params, method, opts, quad):
    if method == "closed_d1":
        return lambda lag: cov_closed_d1(params, lag)
    if method == "closed_d3":
        return lambda lag: cov_closed_d3(params, lag)
    if method == "zero_space":
        def zero_space(lag):
            if lag.r != 0:
                raise WrongMethodError("zero_space evaluates C(0, tau): the r grid must be 0")
            return cov_zero_space(params, lag.tau)
        return zero_space
    if method == "zero_time":
        def zero_time(lag):
            if lag.tau != 0:
                raise WrongMethodError("zero_time evaluates C(r, 0): the tau grid must be 0")
            return cov_zero_time(params, lag.r)
        return zero_time
    if method == "univariate_integral":
        return lambda lag: cov_univariate_integral(params, lag, quad)
    if method == "small_mu_series":
        return lambda lag: cov_small_mu(params, lag, opts.order, quad)
    return lambda lag: cov_spectral_numeric(params, lag, quad)


def cmd_eval(opts):
    params = params_from(opts)
    quad = QuadratureSpec(k_cut=opts.kcut, rel_tol=opts.rel_tol, scheme=opts.scheme)
    method = select_method(params, opts.method)
    evaluate = _evaluator(params, method, opts, quad)
    rows = []
    for r in opts.r_grid:
        for tau in opts.tau_grid:
            value = evaluate(Lag(float(r), float(tau)))
            for note in value.warnings:
                print(f"warning: {note}", file=sys.stderr)
            rows.append((float(r), float(tau), float(value.value), value.method, value.est_error))
    _emit(_table(rows, ("r", "tau", "value", "method", "est_error"), opts.format), opts.out)
    return EXIT_OK


def cmd_spectrum(opts):
    params = params_from(opts)
    rows = [(float(k), float(w), float(spd_spacetime(params, k, w)))
            for k in opts.k_grid for w in opts.omega_grid]
    _emit(_table(rows, ("k", "omega", "S"), opts.format), opts.out)
    return EXIT_OK


def cmd_simulate(opts):
    params = params_from(opts)
    grid = GridSpec(n=opts.n, spacing=opts.spacing, d=params.d)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        field = simulate(params, grid, opts.t_end, opts.dt, opts.seed, threads=opts.threads)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    out = write_field(field, opts.out)
    var = empirical_cov(field, [0.0], [0.0])[(0.0, 0.0)]
    expected = expected_constraints(params, grid)
    summary = {
        "file": out.name,
        "params": params.as_dict(),
        "dtilde": params.dtilde,
        "grid": {"d": grid.d, "n": grid.n, "spacing": grid.spacing},
        "times": {"count": len(field.times), "dt": opts.dt, "t_end": opts.t_end},
        "seed": opts.seed,
        "sample_variance": var.value,
        "sample_variance_se": var.est_error,
        "analytic_variance": expected.s0 / grid.length**grid.d,
        "constraints_t0": dict(zip(("s0", "s1", "s2"), constraint_stats(field, 0).as_tuple())),
        "constraints_expected": dict(zip(("s0", "s1", "s2"), expected.as_tuple())),
        "warnings": [str(w.message) for w in caught],
    }
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    atomic_write(opts.summary or f"{out}.summary.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(opts):
    params = params_from(opts)
    include = ("analytic", "determinism") if opts.skip_monte_carlo else ("analytic", "monte_carlo", "determinism")
    results = run_checks(params, dict(opts.check_tol), mc_seeds=opts.mc_seeds,
                         constraint_seeds=opts.constraint_seeds, include=include)
    passed = overall_pass(results)
    for r in results:
        suffix = "  (informational)" if r.name in INFORMATIONAL else ""
        print(r.line() + suffix, file=sys.stderr)
    report = {"all_passed": passed, "params": params.as_dict(),
              "informational": sorted(INFORMATIONAL),
              "checks": [r.as_dict() for r in results]}
    _emit(json.dumps(report, indent=2) + "\n", opts.out)
    return EXIT_OK if passed else EXIT_VERIFY


COMMANDS = {"eval": cmd_eval, "spectrum": cmd_spectrum, "simulate": cmd_simulate, "verify": cmd_verify}


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = resolve_options(args)
        return COMMANDS[opts.command](opts)
    except SSRFError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
