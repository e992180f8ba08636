"""Euler-Maruyama simulation of the fast-slow stochastic infection system.

Node states follow

    I_{k+1,i} = I_{k,i} + dt * [beta(t_k, w_i) J_k (f_i - I_{k,i}) - gamma_i I_{k,i}]
                + sigma_i dW_{k,i},
    J_k = sum_i mu_i q_i I_{k,i},

with dW ~ N(0, dt) either shared across nodes or drawn independently per node.
Clamped boundary mode projects the post-step state onto [0, f_i]; Free mode
leaves it, in which case paths can escape below the unstable branch and blow
up. The recorded observable is the aggregated prevalence
I(t) = sum_i mu_i I(t, w_i) on every record_stride-th step.

Reproducibility contract: path j draws from a counter-based Philox stream
keyed by (master seed, j), so paths can run in any order, serial or parallel,
and produce identical results. Ensembles are reduced chunk-by-chunk in fixed
path-index order with an associative, order-fixed merge of (count, mean, M2)
partials, which makes serial and parallel runs agree bit for bit for the same
SimConfig. Per-path series are never stored; only running statistics per
recorded time are kept.

Diverged Free-mode paths (non-finite aggregate, checked at recorded steps)
keep their values up to the step before divergence and are NaN afterwards;
ensemble statistics at later times carry a reduced count.
"""

from __future__ import annotations

import enum
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, NoCrossingError
from .hetspace import HeterogeneitySpace, ModelFields, _frozen_array

# budget for pre-generated noise + drift-profile blocks, in bytes
BLOCK_BYTES = 1 << 25

# Free-mode escape detection: physical aggregates live in [-O(1), 1]; a path
# beyond this magnitude is irreversibly past the unstable branch (its blow-up
# to inf takes a handful of steps), so it is flagged diverged at the record
# where it first exceeds the bound, keeping ensemble moments finite.
ESCAPE_BOUND = 1e6

TCRIT_REL_TOL = 1e-12


class NoiseMode(enum.Enum):
    SHARED = "shared"
    INDEPENDENT = "independent"


class BoundaryMode(enum.Enum):
    CLAMPED = "clamped"
    FREE = "free"


@dataclass(frozen=True)
class SeparablePowerDrift:
    """beta(t, w) = rate * t**exponent * beta_shape(w); exponent 1 gives eps*t."""

    rate: float
    exponent: float
    beta_shape: np.ndarray

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise InvalidArgumentError("drift rate must be positive")
        if not (math.isfinite(self.exponent) and self.exponent > 0.0):
            raise InvalidArgumentError("drift exponent must be positive")
        object.__setattr__(
            self, "beta_shape", _frozen_array(self.beta_shape, "beta_shape")
        )
        if np.any(self.beta_shape <= 0.0):
            raise InvalidArgumentError("beta_shape must be positive at all nodes")


@dataclass(frozen=True)
class NonSeparableDrift:
    """beta(t, w) = rate * t**(w + 0.5): drift speed itself depends on the trait."""

    rate: float

    def __post_init__(self):
        if not (math.isfinite(self.rate) and self.rate > 0.0):
            raise InvalidArgumentError("drift rate must be positive")


# None means coefficients frozen at the field values (no time dependence)
DriftSpec = SeparablePowerDrift | NonSeparableDrift | None


@dataclass(frozen=True)
class SimConfig:
    """Stepper and ensemble settings.

    t_end None means "integrate to t_crit of the drift". chunk_paths fixes the
    path partition used for the ensemble reduction (None = one chunk); it is
    part of the reproducibility contract, so changing it may change results in
    the last bits while n_jobs never does.
    """

    dt: float = 0.1
    record_stride: int = 10
    n_paths: int = 100
    seed: int = 0
    noise_mode: NoiseMode = NoiseMode.SHARED
    boundary_mode: BoundaryMode = BoundaryMode.CLAMPED
    i0: float | np.ndarray = 0.0
    t_end: float | None = None
    chunk_paths: int | None = None

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0.0):
            raise InvalidArgumentError("dt must be positive")
        if not isinstance(self.record_stride, (int, np.integer)) or self.record_stride < 1:
            raise InvalidArgumentError("record_stride must be an integer >= 1")
        if not isinstance(self.n_paths, (int, np.integer)) or self.n_paths < 1:
            raise InvalidArgumentError("n_paths must be an integer >= 1")
        if not isinstance(self.seed, (int, np.integer)) or self.seed < 0:
            raise InvalidArgumentError("seed must be a non-negative integer")
        if self.t_end is not None and not self.t_end > 0.0:
            raise InvalidArgumentError("t_end must be positive when given")
        if self.chunk_paths is not None and (
            not isinstance(self.chunk_paths, (int, np.integer)) or self.chunk_paths < 1
        ):
            raise InvalidArgumentError("chunk_paths must be an integer >= 1 when given")


@dataclass(frozen=True)
class EnsembleStats:
    """Cross-path statistics of the aggregated prevalence per recorded time.

    counts holds the number of not-yet-diverged paths entering each estimate;
    var_path is the unbiased sample variance (0 where fewer than two paths
    remain, with var_degenerate set if that holds everywhere). truncated means
    every path diverged before the horizon and the arrays stop early.
    """

    times: np.ndarray
    mean_path: np.ndarray
    var_path: np.ndarray
    n_paths: int
    counts: np.ndarray
    n_diverged: int
    truncated: bool
    var_degenerate: bool


@dataclass(frozen=True)
class PathResult:
    """One path's recorded aggregate; NaN from the divergence record onward."""

    times: np.ndarray
    values: np.ndarray
    diverged: bool
    n_valid: int


def beta_at(drift: DriftSpec, space: HeterogeneitySpace, t: float, i: int) -> float:
    """Transmission coefficient beta(t, w_i) under the drift."""
    if drift is None:
        raise InvalidArgumentError("frozen drift takes beta from the fields")
    t = float(t)
    if t < 0.0:
        raise InvalidArgumentError("t must be non-negative")
    if not 0 <= i < space.n_nodes:
        raise InvalidArgumentError("node index out of range")
    if isinstance(drift, SeparablePowerDrift):
        return drift.rate * t**drift.exponent * float(drift.beta_shape[i])
    return drift.rate * t ** (float(space.nodes[i]) + 0.5)


def _profile_block(drift, space, fields, tvals: np.ndarray) -> np.ndarray:
    """beta(t, .) for a block of times; shape (len(tvals), n_nodes)."""
    if drift is None:
        return np.broadcast_to(fields.beta, (tvals.size, space.n_nodes))
    if isinstance(drift, SeparablePowerDrift):
        if drift.beta_shape.size != space.n_nodes:
            raise InvalidArgumentError("beta_shape does not match the space")
        return (drift.rate * tvals**drift.exponent)[:, None] * drift.beta_shape[None, :]
    return drift.rate * tvals[:, None] ** (space.nodes + 0.5)[None, :]


def t_crit(drift: DriftSpec, space: HeterogeneitySpace, fields: ModelFields) -> float:
    """Unique time t* where R0(t) = <q f beta(t, .)/gamma> crosses 1.

    Closed form for the separable drift with exponent 1; bisection to relative
    1e-12 otherwise. R0(t) is strictly increasing for both drift kinds.
    """
    if drift is None:
        raise InvalidArgumentError("frozen drift has no critical time")
    coeff = space.weights * fields.q * fields.f / fields.gamma

    if isinstance(drift, SeparablePowerDrift):
        s = float(np.sum(coeff * drift.beta_shape))
        if s <= 0.0:
            raise NoCrossingError("R0(t) is identically zero")
        if drift.exponent == 1.0:
            return 1.0 / (drift.rate * s)

        def r0_at(t):
            return drift.rate * t**drift.exponent * s

    else:

        def r0_at(t):
            return float(np.sum(coeff * drift.rate * t ** (space.nodes + 0.5)))

    hi = 1.0
    for _ in range(200):
        if r0_at(hi) >= 1.0:
            break
        hi *= 2.0
    else:
        raise NoCrossingError("R0(t) never reaches 1 on the probed range")
    lo = 0.0
    while hi - lo > TCRIT_REL_TOL * hi:
        mid = 0.5 * (lo + hi)
        if r0_at(mid) >= 1.0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def _resolve_t_end(drift, space, fields, config) -> float:
    if config.t_end is not None:
        return float(config.t_end)
    if drift is None:
        raise InvalidArgumentError("t_end is required when the drift is frozen")
    return t_crit(drift, space, fields)


def _path_generator(seed: int, path_index: int) -> np.random.Generator:
    key = np.array([seed, path_index], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def _initial_state(space, fields, config, n_rows: int) -> np.ndarray:
    i0 = np.broadcast_to(
        np.asarray(config.i0, dtype=np.float64), (space.n_nodes,)
    ).astype(np.float64)
    if np.any(i0 < -1e-12) or np.any(i0 > fields.f + 1e-12):
        raise InvalidArgumentError("i0 must satisfy 0 <= i0_i <= f_i")
    return np.tile(i0, (n_rows, 1))


def _iter_chunk_records(space, fields, drift, config, path_lo, path_hi, n_steps):
    """Step paths [path_lo, path_hi); yield (record_index, aggregates).

    Aggregates are per-path sums <I(t, .)> with NaN marking diverged paths
    from their first non-finite recorded value onward. Record 0 is the initial
    state; record r is step r*record_stride.
    """
    n = space.n_nodes
    p = path_hi - path_lo
    dt = config.dt
    stride = config.record_stride
    shared = config.noise_mode is NoiseMode.SHARED
    clamp = config.boundary_mode is BoundaryMode.CLAMPED

    f = fields.f
    gamma = fields.gamma
    sigma = fields.sigma
    eta = fields.eta
    has_noise = bool(np.any(sigma > 0.0))
    has_import = bool(np.any(eta > 0.0))
    w_rec = space.weights
    w_dyn = space.weights * fields.q
    sqrt_dt = math.sqrt(dt)

    state = _initial_state(space, fields, config, p)
    diverged = np.zeros(p, dtype=bool)
    gens = [_path_generator(config.seed, j) for j in range(path_lo, path_hi)]

    per_step_bytes = 8 * (p * (1 if shared else n) + n)
    block = max(1, min(n_steps, BLOCK_BYTES // per_step_bytes))

    # reusable work buffers: no allocations inside the step loop
    j_agg = np.empty(p)
    work = np.empty((p, n))
    work2 = np.empty((p, n))

    def aggregate():
        np.multiply(state, w_rec, out=work)
        agg = np.sum(work, axis=1)
        with np.errstate(invalid="ignore"):
            bad = ~(np.abs(agg) <= ESCAPE_BOUND) & ~diverged
        if bad.any():
            diverged[bad] = True
            state[bad] = 0.0
        if diverged.any():
            agg[diverged] = np.nan
        return agg

    yield 0, aggregate()

    with np.errstate(over="ignore", invalid="ignore"):
        k = 0
        while k < n_steps:
            kb = min(block, n_steps - k)
            tvals = (k + np.arange(kb, dtype=np.float64)) * dt
            profs = _profile_block(drift, space, fields, tvals)
            if has_noise:
                if shared:
                    noise = np.empty((p, kb))
                    for row, gen in enumerate(gens):
                        noise[row] = gen.standard_normal(kb)
                else:
                    noise = np.empty((p, kb, n))
                    for row, gen in enumerate(gens):
                        noise[row] = gen.standard_normal((kb, n))
                noise *= sqrt_dt
            for j in range(kb):
                np.multiply(state, w_dyn, out=work)
                np.sum(work, axis=1, out=j_agg)
                np.multiply(profs[j], j_agg[:, None], out=work)
                if has_import:
                    np.add(work, eta, out=work)
                np.subtract(f, state, out=work2)
                np.multiply(work, work2, out=work)
                np.multiply(gamma, state, out=work2)
                np.subtract(work, work2, out=work)
                np.multiply(work, dt, out=work)
                np.add(state, work, out=state)
                if has_noise:
                    if shared:
                        np.multiply(sigma, noise[:, j][:, None], out=work)
                    else:
                        np.multiply(sigma, noise[:, j, :], out=work)
                    np.add(state, work, out=state)
                if clamp:
                    np.clip(state, 0.0, f, out=state)
                step = k + j + 1
                if step % stride == 0:
                    yield step // stride, aggregate()
            k += kb


def _chunk_stats(space, fields, drift, config, path_lo, path_hi, n_steps, n_rec):
    """(count, mean, M2) per recorded time for one contiguous path chunk."""
    count = np.zeros(n_rec, dtype=np.int64)
    mean = np.zeros(n_rec)
    m2 = np.zeros(n_rec)
    for ridx, agg in _iter_chunk_records(
        space, fields, drift, config, path_lo, path_hi, n_steps
    ):
        finite = np.isfinite(agg)
        c = int(np.count_nonzero(finite))
        count[ridx] = c
        if c > 0:
            vals = np.where(finite, agg, 0.0)
            mu = np.sum(vals) / c
            mean[ridx] = mu
            dev = np.where(finite, agg - mu, 0.0)
            m2[ridx] = np.sum(dev * dev)
    return count, mean, m2


def _chunk_stats_worker(args):
    return _chunk_stats(*args)


def _merge_stats(a, b):
    """Order-fixed pairwise merge of (count, mean, M2) partials."""
    ca, ma, m2a = a
    cb, mb, m2b = b
    c = ca + cb
    safe = np.maximum(c, 1).astype(np.float64)
    delta = mb - ma
    mean = ma + delta * (cb / safe)
    m2 = m2a + m2b + delta * delta * (ca * (cb / safe))
    zero = c == 0
    if zero.any():
        mean = np.where(zero, 0.0, mean)
        m2 = np.where(zero, 0.0, m2)
    return c, mean, m2


def _record_times(n_steps: int, config: SimConfig) -> np.ndarray:
    steps = np.arange(0, n_steps + 1, config.record_stride, dtype=np.int64)
    return steps.astype(np.float64) * config.dt


def _step_count(t_end: float, config: SimConfig) -> int:
    n_steps = int(round(t_end / config.dt))
    if n_steps < 1:
        raise InvalidArgumentError("t_end must cover at least one step")
    return n_steps


def simulate_path(
    space: HeterogeneitySpace,
    fields: ModelFields,
    drift: DriftSpec,
    config: SimConfig,
    path_index: int,
) -> PathResult:
    """Recorded aggregated prevalence of a single path.

    Deterministic in (config.seed, path_index) and bit-identical to the same
    path inside any ensemble run.
    """
    if not isinstance(path_index, (int, np.integer)) or path_index < 0:
        raise InvalidArgumentError("path_index must be a non-negative integer")
    t_end = _resolve_t_end(drift, space, fields, config)
    n_steps = _step_count(t_end, config)
    n_rec = n_steps // config.record_stride + 1
    values = np.full(n_rec, np.nan)
    for ridx, agg in _iter_chunk_records(
        space, fields, drift, config, path_index, path_index + 1, n_steps
    ):
        values[ridx] = agg[0]
    bad = np.flatnonzero(~np.isfinite(values))
    diverged = bad.size > 0
    n_valid = int(bad[0]) if diverged else n_rec
    return PathResult(_record_times(n_steps, config), values, diverged, n_valid)


def simulate_ensemble(
    space: HeterogeneitySpace,
    fields: ModelFields,
    drift: DriftSpec,
    config: SimConfig,
    n_jobs: int = 1,
) -> EnsembleStats:
    """Cross-path mean and unbiased variance of the aggregate per recorded time.

    Paths are split into contiguous chunks of config.chunk_paths and reduced
    in chunk order; n_jobs > 1 runs chunks in worker processes without
    changing any output bit.
    """
    if not isinstance(n_jobs, (int, np.integer)) or n_jobs < 1:
        raise InvalidArgumentError("n_jobs must be an integer >= 1")
    t_end = _resolve_t_end(drift, space, fields, config)
    n_steps = _step_count(t_end, config)
    n_rec = n_steps // config.record_stride + 1

    chunk = config.chunk_paths or config.n_paths
    bounds = [
        (lo, min(lo + chunk, config.n_paths))
        for lo in range(0, config.n_paths, chunk)
    ]
    tasks = [
        (space, fields, drift, config, lo, hi, n_steps, n_rec) for lo, hi in bounds
    ]
    if n_jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=min(n_jobs, len(tasks))) as pool:
            partials = list(pool.map(_chunk_stats_worker, tasks))
    else:
        partials = [_chunk_stats(*task) for task in tasks]

    total = partials[0]
    for part in partials[1:]:
        total = _merge_stats(total, part)
    count, mean, m2 = total

    var = np.where(count >= 2, m2 / np.maximum(count - 1, 1), 0.0)
    times = _record_times(n_steps, config)
    n_diverged = int(config.n_paths - count[-1])

    truncated = False
    dead = np.flatnonzero(count == 0)
    if dead.size > 0:
        cut = int(dead[0])
        times, mean, var, count = times[:cut], mean[:cut], var[:cut], count[:cut]
        truncated = True

    return EnsembleStats(
        times=times,
        mean_path=mean,
        var_path=var,
        n_paths=config.n_paths,
        counts=count,
        n_diverged=n_diverged,
        truncated=truncated,
        var_degenerate=bool(count.size == 0 or count.max() < 2),
    )


def ensemble_stats_from_paths(times, paths: np.ndarray) -> EnsembleStats:
    """Statistics of externally supplied path rows (paths.shape = (P, T)).

    Same masking and reduction rules as simulate_ensemble; NaN entries mark
    diverged stretches. Mainly a seam for testing the estimator.
    """
    times = np.asarray(times, dtype=np.float64)
    paths = np.asarray(paths, dtype=np.float64)
    if paths.ndim != 2 or paths.shape[1] != times.size:
        raise InvalidArgumentError("paths must be (n_paths, len(times))")
    n_rec = times.size
    count = np.zeros(n_rec, dtype=np.int64)
    mean = np.zeros(n_rec)
    m2 = np.zeros(n_rec)
    finite = np.isfinite(paths)
    for ridx in range(n_rec):
        col = paths[:, ridx]
        mask = finite[:, ridx]
        c = int(np.count_nonzero(mask))
        count[ridx] = c
        if c > 0:
            vals = np.where(mask, col, 0.0)
            mu = np.sum(vals) / c
            mean[ridx] = mu
            dev = np.where(mask, col - mu, 0.0)
            m2[ridx] = np.sum(dev * dev)
    var = np.where(count >= 2, m2 / np.maximum(count - 1, 1), 0.0)
    return EnsembleStats(
        times=times,
        mean_path=mean,
        var_path=var,
        n_paths=int(paths.shape[0]),
        counts=count,
        n_diverged=int(paths.shape[0] - count[-1]) if n_rec else 0,
        truncated=False,
        var_degenerate=bool(count.size == 0 or count.max() < 2),
    )
