"""
Langevin simulation of the Spartan space-time field on a periodic grid.

Every spatial Fourier mode is an independent mean-reverting (Ornstein-Uhlenbeck)
process with rate ``L(k) = D~ P(k)`` and stationary variance ``sigma2(k)``. The
one-step update

    x~(k, t + dt) = x~(k, t) exp(-L dt) + eps,   Var eps = sigma2 (1 - exp(-2 L dt))

is exact, so the time step only sets the sampling interval.

Grid conventions (box length ``L = n * spacing``):

* ``x(s) = irfftn(X) / spacing^d``, so that ``X`` approximates the continuum
  transform ``x~(k)`` and ``E|X_j|^2 = sigma2_j = L^d S_j``;
* in d=1, ``S_j`` is the continuum spectral density folded over all aliases,
  ``sum_m spd_static(k_j + 2 pi m / spacing)``: the grid values then have
  exactly the continuum covariance at lattice lags (up to periodic images);
* in d=2,3 the aliases are dropped, ``S_j = spd_static(|k_j|)``; for ``mu = 0``
  the grid cutoff ``pi / spacing`` is what keeps the variance finite.

Noise for mode ``j`` at step ``s`` comes from a Philox stream keyed by the seed
with counter ``(block(j), s)``, so output does not depend on how blocks are
distributed over threads.
"""

from __future__ import annotations

import json
import math
import struct
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ._fileio import atomic_write
from .errors import EstimationError, InvalidParameterError
from .model import ModelParams, require_permissible, validate
from .spectral import polynomial, spd_static
from .values import CovValue

__all__ = [
    "GridSpec",
    "FieldGrid",
    "ConstraintStats",
    "ModeSpectrum",
    "GridRegularizationWarning",
    "mode_spectrum",
    "folded_spd_1d",
    "simulate",
    "field_modes",
    "empirical_cov",
    "constraint_stats",
    "expected_constraints",
    "write_field",
    "read_field",
]

BLOCK = 64
FOLD_IMAGES = 256
MAGIC = b"SSTF1"
# magic, d, n, spacing, n_times, eta0, eta1, xi, mu, noise_d, seed
HEADER = struct.Struct("<5sqqdq5dQ")


class GridRegularizationWarning(UserWarning):
    """The continuum field has infinite variance; the grid cutoff regularizes it."""


@dataclass(frozen=True)
class GridSpec:
    """
    Periodic grid with ``n`` points of step ``spacing`` along each of ``d`` axes.

    ``n`` must be a power of two, at least 8.
    """

    n: int
    spacing: float
    d: int = 1

    def __post_init__(self):
        if isinstance(self.n, bool) or not isinstance(self.n, (int, np.integer)):
            raise InvalidParameterError(f"n must be an integer, got {self.n!r}", "n")
        if self.n < 8 or self.n & (self.n - 1):
            raise InvalidParameterError(f"n must be a power of two >= 8, got {self.n}", "n")
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise InvalidParameterError(f"spacing must be finite and > 0, got {self.spacing!r}", "spacing")
        if self.d not in (1, 2, 3):
            raise InvalidParameterError(f"d must be 1, 2 or 3, got {self.d!r}", "d")

    @property
    def shape(self):
        return (self.n,) * self.d

    @property
    def length(self):
        return self.n * self.spacing

    @property
    def cell_volume(self):
        return self.spacing**self.d

    def mode_shape(self):
        """Shape of the half-spectrum array used by ``rfftn``."""
        return (self.n,) * (self.d - 1) + (self.n // 2 + 1,)

    def mode_axes(self):
        """Wavenumber components, broadcastable to :meth:`mode_shape`."""
        full = 2.0 * np.pi * np.fft.fftfreq(self.n, self.spacing)
        half = 2.0 * np.pi * np.fft.rfftfreq(self.n, self.spacing)
        axes = []
        for a in range(self.d):
            comp = half if a == self.d - 1 else full
            shape = [1] * self.d
            shape[a] = comp.size
            axes.append(comp.reshape(shape))
        return axes

    def mode_multiplicity(self):
        """How often each stored half-spectrum mode occurs in the full spectrum (1 or 2)."""
        mult = np.full(self.mode_shape(), 2.0)
        mult[..., 0] = 1.0
        mult[..., self.n // 2] = 1.0
        return mult


@dataclass(frozen=True, eq=False)
class FieldGrid:
    """
    A simulated realization: ``values[i]`` is the field at ``times[i]``.

    ``values`` has shape ``(len(times),) + grid.shape`` and is read-only.
    """

    grid: GridSpec
    times: tuple[float, ...]
    values: np.ndarray
    seed: int
    params: ModelParams

    def __post_init__(self):
        values = np.array(self.values, dtype=np.float64)
        expected = (len(self.times),) + self.grid.shape
        if values.shape != expected:
            raise InvalidParameterError(f"values have shape {values.shape}, expected {expected}", "values")
        if not np.all(np.isfinite(values)):
            raise InvalidParameterError("field values must be finite", "values")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "times", tuple(float(t) for t in self.times))


@dataclass(frozen=True)
class ConstraintStats:
    """Discretized squared-field, squared-gradient and squared-Laplacian integrals."""

    s0: float
    s1: float
    s2: float

    def __post_init__(self):
        for name in ("s0", "s1", "s2"):
            if not getattr(self, name) >= 0:
                raise ValueError(f"{name} must be >= 0, got {getattr(self, name)!r}")

    def as_tuple(self):
        return (self.s0, self.s1, self.s2)


@dataclass(frozen=True, eq=False)
class ModeSpectrum:
    """Per-mode stationary variance ``sigma2`` and relaxation rate on the half spectrum."""

    k: np.ndarray
    sigma2: np.ndarray
    rate: np.ndarray
    folded: bool


def _tail_integral(params, a, nodes=48):
    """``int_a^inf spd_static(q) dq`` by Gauss-Legendre in ``t = a / q``."""
    x, w = np.polynomial.legendre.leggauss(nodes)
    t = 0.5 * (x + 1.0)
    w = 0.5 * w
    q = a[:, None] / t[None, :]
    vals = np.asarray(spd_static(params, q)) * a[:, None] / t[None, :] ** 2
    return vals @ w


def _spd_slope(params, q):
    """``d spd_static / dk``."""
    xi2 = params.xi**2
    dp = 2.0 * params.eta1 * xi2 * q + 4.0 * params.mu * xi2 * xi2 * q**3
    return -params.eta0 * params.xi * dp / np.asarray(polynomial(params, q)) ** 2


def folded_spd_1d(params: ModelParams, k, spacing: float):
    """
    ``sum_m spd_static(k + 2 pi m / spacing)`` for d=1.

    Images ``|m| <= 256`` are summed directly; the remainder on each side is
    replaced by its Euler-Maclaurin estimate (midpoint-rule integral plus the
    first derivative correction).
    """
    k = np.atleast_1d(np.asarray(k, dtype=float))
    h = 2.0 * np.pi / spacing
    m = np.arange(-FOLD_IMAGES, FOLD_IMAGES + 1)
    out = np.empty_like(k)
    for start in range(0, k.size, 1024):
        kk = k[start:start + 1024]
        core = np.asarray(spd_static(params, kk[:, None] + h * m[None, :])).sum(axis=1)
        edge = h * (FOLD_IMAGES + 0.5)
        tails = 0.0
        for a in (edge + kk, edge - kk):
            tails = tails + _tail_integral(params, a) / h + h / 24.0 * _spd_slope(params, a)
        out[start:start + 1024] = core + tails
    return out


def mode_spectrum(params: ModelParams, grid: GridSpec) -> ModeSpectrum:
    """Stationary variances ``sigma2 = L^d S_j`` and rates ``D~ P(|k_j|)`` of the grid modes."""
    require_permissible(params)
    if params.d != grid.d:
        raise InvalidParameterError(f"grid dimension {grid.d} differs from model dimension {params.d}", "d")
    axes = grid.mode_axes()
    k = np.sqrt(sum(np.broadcast_to(c, grid.mode_shape()) ** 2 for c in axes))
    if grid.d == 1:
        spd = folded_spd_1d(params, k, grid.spacing)
    else:
        spd = np.asarray(spd_static(params, k))
    rate = params.dtilde * np.asarray(polynomial(params, k))
    return ModeSpectrum(k=k, sigma2=grid.length**grid.d * spd, rate=rate, folded=grid.d == 1)


def _block_normals(seed, step, block):
    gen = np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, block, step]))
    return gen.standard_normal(2 * BLOCK)


def _hermitian_project(z, n):
    """
    Make the ``k_last = 0`` and ``k_last = n/2`` planes Hermitian,
    ``Z(k) = (z(k) + conj z(-k)) / sqrt 2``; keeps ``E|Z|^2 = E|z|^2``.
    """
    for last in (0, n // 2):
        plane = z[..., last]
        if plane.ndim == 0:
            z[..., last] = math.sqrt(2.0) * plane.real
        else:
            mirror = np.roll(np.flip(plane), 1, axis=tuple(range(plane.ndim)))
            z[..., last] = (plane + np.conj(mirror)) / math.sqrt(2.0)
    return z


def _unit_noise(seed, step, grid, pool):
    """Circular complex Gaussian modes with ``E|z|^2 = 1``, Hermitian on the boundary planes."""
    shape = grid.mode_shape()
    n_modes = math.prod(shape)
    n_blocks = -(-n_modes // BLOCK)

    def block(b):
        return _block_normals(seed, step, b)

    draws = list(pool.map(block, range(n_blocks))) if pool else [block(b) for b in range(n_blocks)]
    raw = np.stack(draws)
    z = ((raw[:, :BLOCK] + 1j * raw[:, BLOCK:]) / math.sqrt(2.0)).reshape(-1)[:n_modes]
    return _hermitian_project(z.reshape(shape), grid.n)


def _check_time_axis(t_end, dt):
    if not (dt > 0 and math.isfinite(dt)):
        raise InvalidParameterError(f"dt must be finite and > 0, got {dt!r}", "dt")
    if not (t_end >= 0 and math.isfinite(t_end)):
        raise InvalidParameterError(f"t_end must be finite and >= 0, got {t_end!r}", "t_end")
    steps = round(t_end / dt)
    if abs(steps * dt - t_end) > 1e-9 * max(1.0, t_end):
        raise InvalidParameterError(f"t_end = {t_end} is not a multiple of dt = {dt}", "t_end")
    return steps


def simulate(params: ModelParams, grid: GridSpec, t_end: float, dt: float, seed: int,
             threads: int = 1) -> FieldGrid:
    """
    Simulate the field at times ``0, dt, ..., t_end`` from a stationary start.

    Parameters
    ----------
    params : ModelParams
        permissible model parameters with ``params.d == grid.d``
    grid : GridSpec
    t_end : float
        last sample time, an integer multiple of ``dt`` (0 for a snapshot)
    dt : float
        sampling interval; the update is exact for any ``dt``
    seed : int
        in ``[0, 2**64)``; the output is a pure function of the arguments
    threads : int, default: 1
        worker threads for noise generation; does not change the result

    Returns
    -------
    FieldGrid
    """
    report = validate(params)
    require_permissible(params)
    steps = _check_time_axis(t_end, dt)
    if isinstance(seed, bool) or not isinstance(seed, (int, np.integer)) or not 0 <= seed < 2**64:
        raise InvalidParameterError(f"seed must be an integer in [0, 2**64), got {seed!r}", "seed")
    if isinstance(threads, bool) or not isinstance(threads, (int, np.integer)) or threads < 1:
        raise InvalidParameterError(f"threads must be a positive integer, got {threads!r}", "threads")
    if not report.finite_variance:
        warnings.warn(
            f"d = {params.d}, mu = 0 has infinite continuum variance; the grid cutoff "
            f"k_max = pi / spacing = {math.pi / grid.spacing:.6g} acts as the regularizer",
            GridRegularizationWarning, stacklevel=2)
    spec = mode_spectrum(params, grid)
    decay = np.exp(-spec.rate * dt)
    kick = np.sqrt(spec.sigma2 * -np.expm1(-2.0 * spec.rate * dt))
    scale = 1.0 / grid.cell_volume
    space = tuple(range(grid.d))
    seed = int(seed)

    values = np.empty((steps + 1,) + grid.shape)
    pool = ThreadPoolExecutor(max_workers=threads) if threads > 1 else None
    try:
        modes = np.sqrt(spec.sigma2) * _unit_noise(seed, 0, grid, pool)
        values[0] = np.fft.irfftn(modes, s=grid.shape, axes=space) * scale
        for step in range(1, steps + 1):
            modes = modes * decay + kick * _unit_noise(seed, step, grid, pool)
            values[step] = np.fft.irfftn(modes, s=grid.shape, axes=space) * scale
    finally:
        if pool:
            pool.shutdown()
    times = tuple(i * dt for i in range(steps + 1))
    return FieldGrid(grid=grid, times=times, values=values, seed=seed, params=params)


def field_modes(field: FieldGrid) -> np.ndarray:
    """Half-spectrum modes ``X = rfftn(x) spacing^d`` for every stored time."""
    axes = tuple(range(1, field.grid.d + 1))
    return np.fft.rfftn(field.values, axes=axes) * field.grid.cell_volume


def _lag_steps(value, step, limit, name):
    idx = round(abs(value) / step)
    if abs(idx * step - abs(value)) > 1e-9 * max(1.0, abs(value)):
        raise EstimationError(f"{name} lag {value} is not a multiple of the sampling step {step}")
    if idx > limit:
        raise EstimationError(f"{name} lag {value} exceeds the available extent {limit * step}")
    return idx


def _sampling_interval(times):
    if len(times) < 2:
        return None
    steps = np.diff(times)
    if not np.allclose(steps, steps[0], rtol=1e-9, atol=0.0):
        raise EstimationError("time samples must be equally spaced")
    return float(steps[0])


def empirical_cov(field: FieldGrid, r_lags, t_lags) -> dict:
    """
    Space-time averaged covariance estimates.

    The estimator averages ``x(s, t) x(s + r e_a, t + |tau|)`` over all sites
    (periodic wraparound), all time origins and, for d > 1, all axis directions
    ``e_a``. The field mean is known to be zero and is not subtracted.
    The standard error comes from block averaging over contiguous slabs along
    the first spatial axis.

    Returns
    -------
    dict
        ``{(r, tau): CovValue}`` in row-major order over ``r`` then ``tau``;
        ``est_error`` holds the standard error

    Raises
    ------
    EstimationError
        for lags that are not grid multiples, exceed half the box or the time
        extent, or leave no samples
    """
    grid = field.grid
    x = field.values
    dt = _sampling_interval(field.times)
    n_blocks = min(16, grid.n // 4)
    out = {}
    for r in r_lags:
        shift = _lag_steps(r, grid.spacing, grid.n // 2, "spatial")
        for tau in t_lags:
            if tau == 0:
                lag_t = 0
            elif dt is None:
                raise EstimationError("a single snapshot supports only tau = 0")
            else:
                lag_t = _lag_steps(tau, dt, len(field.times) - 1, "time")
            a = x[: len(field.times) - lag_t]
            b = x[lag_t:]
            prod = sum(a * np.roll(b, -shift, axis=ax) for ax in range(1, grid.d + 1)) / grid.d
            profile = prod.mean(axis=(0,) + tuple(range(2, grid.d + 1)))
            blocks = profile.reshape(n_blocks, -1).mean(axis=1)
            se = float(np.std(blocks, ddof=1) / math.sqrt(n_blocks))
            out[(r, tau)] = CovValue(float(blocks.mean()), "empirical", se)
    return out


def constraint_stats(field: FieldGrid, t_index: int) -> ConstraintStats:
    """
    ``S0 = sum x^2``, ``S1 = sum |forward-difference gradient|^2`` and
    ``S2 = sum (discrete Laplacian)^2``, each times ``spacing^d``, at one time.
    """
    if not -len(field.times) <= t_index < len(field.times):
        raise InvalidParameterError(f"time index {t_index} out of range", "t_index")
    grid = field.grid
    x = field.values[t_index]
    h = grid.spacing
    s0 = float(np.sum(x * x))
    s1 = 0.0
    lap = np.zeros_like(x)
    for ax in range(grid.d):
        forward = np.roll(x, -1, axis=ax)
        s1 += float(np.sum((forward - x) ** 2)) / h**2
        lap += (forward - 2.0 * x + np.roll(x, 1, axis=ax)) / h**2
    s2 = float(np.sum(lap * lap))
    vol = grid.cell_volume
    return ConstraintStats(s0 * vol, s1 * vol, s2 * vol)


def expected_constraints(params: ModelParams, grid: GridSpec) -> ConstraintStats:
    """
    Ensemble means of :func:`constraint_stats` for the simulated grid field.

    ``E[S0] = sum_j S_j``, ``E[S1] = sum_j S_j w_j`` and ``E[S2] = sum_j S_j w_j^2``
    over the full discrete spectrum, where ``S_j = sigma2_j / L^d`` and
    ``w_j = sum_a (2 sin(k_a spacing / 2) / spacing)^2`` is the symbol of the
    finite differences.
    """
    spec = mode_spectrum(params, grid)
    density = spec.sigma2 / grid.length**grid.d * grid.mode_multiplicity()
    h = grid.spacing
    w = sum((2.0 * np.sin(c * h / 2.0) / h) ** 2 for c in grid.mode_axes())
    w = np.broadcast_to(w, density.shape)
    return ConstraintStats(float(np.sum(density)), float(np.sum(density * w)), float(np.sum(density * w * w)))


def _sidecar(field: FieldGrid):
    g = field.grid
    return {
        "format": "SSTF1",
        "header": {
            "struct": HEADER.format,
            "fields": ["magic", "d", "n", "spacing", "n_times",
                       "eta0", "eta1", "xi", "mu", "noise_d", "seed"],
            "bytes": HEADER.size,
        },
        "values": {
            "dtype": "<f8",
            "order": "row-major",
            "shape": [len(field.times)] + list(g.shape),
            "axes": ["time"] + [f"x{a}" for a in range(g.d)],
        },
        "grid": {"d": g.d, "n": g.n, "spacing": g.spacing},
        "params": field.params.as_dict(),
        "dtilde": field.params.dtilde,
        "seed": field.seed,
        "times": list(field.times),
        "normalization": "x = irfftn(X) / spacing^d with E|X_j|^2 = L^d S_j",
        "spectrum": "folded over aliases" if g.d == 1 else "truncated at the grid cutoff",
    }


def sidecar_path(path):
    return Path(str(path) + ".json")


def write_field(field: FieldGrid, path) -> Path:
    """
    Write ``field`` in the SSTF1 layout plus a JSON sidecar ``<path>.json``.

    The binary is the packed little-endian header (magic ``SSTF1``, d, n,
    spacing, number of times, eta0, eta1, xi, mu, D, seed) followed by the
    values as row-major ``<f8``. Sample times live in the sidecar.
    """
    g, p = field.grid, field.params
    header = HEADER.pack(MAGIC, g.d, g.n, g.spacing, len(field.times),
                         p.eta0, p.eta1, p.xi, p.mu, p.noise_d, field.seed)
    body = np.ascontiguousarray(field.values, dtype="<f8").tobytes()
    atomic_write(path, header + body)
    atomic_write(sidecar_path(path), json.dumps(_sidecar(field), indent=2, sort_keys=True) + "\n")
    return Path(path)


def read_field(path) -> FieldGrid:
    """Inverse of :func:`write_field`; needs the sidecar for the sample times."""
    raw = Path(path).read_bytes()
    if len(raw) < HEADER.size or raw[:5] != MAGIC:
        raise InvalidParameterError(f"{path} is not an SSTF1 file", "path")
    magic, d, n, spacing, n_times, eta0, eta1, xi, mu, noise_d, seed = HEADER.unpack_from(raw)
    grid = GridSpec(n=n, spacing=spacing, d=d)
    count = n_times * n**d
    if len(raw) != HEADER.size + 8 * count:
        raise InvalidParameterError(f"{path}: payload size does not match the header", "path")
    values = np.frombuffer(raw, dtype="<f8", offset=HEADER.size, count=count)
    meta = json.loads(sidecar_path(path).read_text())
    times = meta["times"]
    if len(times) != n_times:
        raise InvalidParameterError(f"{path}: sidecar lists {len(times)} times, header {n_times}", "path")
    params = ModelParams(d=d, eta0=eta0, eta1=eta1, xi=xi, mu=mu, noise_d=noise_d)
    return FieldGrid(grid=grid, times=tuple(times), values=values.reshape((n_times,) + grid.shape),
                     seed=seed, params=params)
