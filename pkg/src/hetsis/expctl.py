"""Experiment definitions, config files, CSV/JSON artifacts, and the CLI.

Each named experiment is a desk-scale numerical study of one question about
the model (scaling windows, sweep trends, eigenvalue curves). An experiment
resolves its parameters from the standard defaults (beta=0.3, gamma=0.4,
sigma=0.01, eps=1e-4, I(0)=0, 100 paths, dt=0.1, record stride 10), runs the
simulation/analysis pipeline, and writes deterministic artifacts: variance
series as CSV, fits as JSON, sweep tables, and a manifest with content
hashes. Re-running the same spec and seed reproduces every file byte for
byte, serial or parallel.

Config files are TOML with dotted sections, e.g.

    name = "discrete_n_sweep"
    [sim]
    seed = 3
    n_paths = 100
    [params]
    p = 0.5
    [sweep]
    n = [2, 10, 100]

The CLI entry point is `hetsis` (see main); exit codes: 0 success, 2 invalid
configuration or I/O problem, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from . import __version__
from .detdyn import leading_eigenvalue, r0, solve_steady_states
from .errors import (
    HetsisError,
    InternalSolverError,
    InvalidArgumentError,
    NoCrossingError,
    OutputLockError,
)
from .hetspace import (
    HeterogeneitySpace,
    ModelFields,
    make_discrete_space,
    make_fields,
    make_quadrature_space,
    theta_of_p,
    truncated_normal_density,
)
from .stochsim import (
    BoundaryMode,
    NoiseMode,
    NonSeparableDrift,
    SeparablePowerDrift,
    SimConfig,
    simulate_ensemble,
    simulate_path,
    t_crit,
)
from .warnsign import FitResult, fit_power_law, sweep_summary

LOCK_NAME = "run.lock"

SIM_DEFAULTS = {
    "dt": 0.1,
    "record_stride": 10,
    "n_paths": 100,
    "seed": 0,
    "chunk_paths": None,
    "t_end": None,
    "i0": 0.0,
    "n_jobs": 1,
}

PARAM_DEFAULTS = {
    "beta": 0.3,
    "gamma": 0.4,
    "sigma": 0.01,
    "eps": 1e-4,
    "p": 0.5,
    "mean": 0.5,
    "m": 100,
}


@dataclass(frozen=True)
class ExperimentSpec:
    """A named experiment with parameter overrides and simulation settings."""

    name: str
    parameters: dict
    sim: dict
    output_dir: str

    def __post_init__(self):
        if self.name not in EXPERIMENTS:
            known = ", ".join(sorted(EXPERIMENTS))
            raise InvalidArgumentError(f"unknown experiment {self.name!r} (known: {known})")
        for key in self.sim:
            if key not in SIM_DEFAULTS:
                raise InvalidArgumentError(f"unknown sim key {key!r}")

    @classmethod
    def from_file(cls, path) -> "ExperimentSpec":
        with open(path, "rb") as fh:
            doc = tomllib.load(fh)
        return cls.from_mapping(doc, default_out=Path(path).stem)

    @classmethod
    def from_mapping(cls, doc: dict, default_out: str = "run") -> "ExperimentSpec":
        if "name" not in doc:
            raise InvalidArgumentError("spec must set a top-level 'name'")
        parameters = dict(doc.get("params", {}))
        sweep = doc.get("sweep", {})
        if sweep:
            parameters["sweep"] = dict(sweep)
        return cls(
            name=str(doc["name"]),
            parameters=parameters,
            sim=dict(doc.get("sim", {})),
            output_dir=str(doc.get("out_dir", default_out)),
        )


@dataclass(frozen=True)
class RunRecord:
    """What a run produced: spec hash, seed, code version, file manifest."""

    spec_hash: str
    seed: int
    version: str
    files: tuple


def _canonical(obj):
    if isinstance(obj, dict):
        return {str(k): _canonical(v) for k, v in sorted(obj.items())}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_canonical(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    return obj


def spec_hash(spec: ExperimentSpec) -> str:
    """Content hash of the resolved spec (output location and n_jobs excluded)."""
    sim = {k: v for k, v in spec.sim.items() if k != "n_jobs"}
    payload = {"name": spec.name, "parameters": spec.parameters, "sim": sim}
    text = json.dumps(_canonical(payload), sort_keys=True)
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _fmt(value) -> str:
    # repr of a Python float round-trips exactly via float()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def emit_csv(times, series: dict, path) -> None:
    """Write a CSV with a leading time-like column and named series columns.

    UTF-8, LF endings, shortest round-trip decimal representation. All
    columns must share the length of `times`; zero rows gives a header-only
    file.
    """
    times = np.asarray(times)
    names = list(series)
    columns = [np.asarray(series[name]) for name in names]
    for name, col in zip(names, columns):
        if col.shape != times.shape:
            raise InvalidArgumentError(f"column {name!r} length differs from times")
    buf = io.StringIO()
    buf.write(",".join(["t"] + names) + "\n")
    for k in range(times.size):
        row = [_fmt(times[k])] + [_fmt(col[k]) for col in columns]
        buf.write(",".join(row) + "\n")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(buf.getvalue())


def _write_json(obj, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_canonical(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


@contextmanager
def _output_lock(out_dir: Path):
    """One experiment process per output directory."""
    lock_path = out_dir / LOCK_NAME
    try:
        fd = os.open(lock_path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
    except FileExistsError:
        raise OutputLockError(f"output directory is locked: {lock_path}") from None
    try:
        os.write(fd, f"{os.getpid()}\n".encode())
        yield
    finally:
        os.close(fd)
        os.unlink(lock_path)


def _resolve_sim(sim: dict) -> dict:
    out = dict(SIM_DEFAULTS)
    out.update(sim)
    return out


def _sim_config(sim: dict, *, noise_mode, boundary_mode, t_end=None) -> SimConfig:
    return SimConfig(
        dt=float(sim["dt"]),
        record_stride=int(sim["record_stride"]),
        n_paths=int(sim["n_paths"]),
        seed=int(sim["seed"]),
        noise_mode=noise_mode,
        boundary_mode=boundary_mode,
        i0=sim["i0"],
        t_end=t_end if t_end is not None else sim["t_end"],
        chunk_paths=sim["chunk_paths"],
    )


def _fit_below_tcrit(stats, tc: float, fraction: float) -> FitResult:
    keep = stats.times < tc * (1.0 - 1e-12)
    return fit_power_law(stats.times[keep], stats.var_path[keep], tc, fraction)


def _variance_run(
    out: Path,
    tag: str,
    space: HeterogeneitySpace,
    fields: ModelFields,
    drift,
    config: SimConfig,
    fraction: float,
    n_jobs: int,
):
    """One ensemble + fit; writes variance{tag}.csv and fit{tag}.json."""
    stats = simulate_ensemble(space, fields, drift, config, n_jobs=n_jobs)
    tc = t_crit(drift, space, fields)
    var_name = f"variance{tag}.csv"
    fit_name = f"fit{tag}.json"
    emit_csv(
        stats.times,
        {"mean": stats.mean_path, "var": stats.var_path, "count": stats.counts},
        out / var_name,
    )
    fit = _fit_below_tcrit(stats, tc, fraction)
    _write_json(fit.as_dict(), out / fit_name)
    return [var_name, fit_name], fit


def _sweep_files(out: Path, entries) -> list:
    summary = sweep_summary(entries)
    emit_csv(
        summary.params,
        {
            "A": summary.amplitudes,
            "alpha": summary.exponents,
            "rss": summary.rss,
            "n_points": summary.n_points,
        },
        out / "sweep.csv",
    )
    _write_json(
        {
            "alpha_spearman": summary.alpha_spearman,
            "amplitude_spearman": summary.amplitude_spearman,
        },
        out / "trend.json",
    )
    return ["sweep.csv", "trend.json"]


def _homogeneous_setup(params):
    space = make_quadrature_space(1)
    fields = make_fields(
        space, beta=params["beta"], gamma=params["gamma"], sigma=params["sigma"]
    )
    return space, fields


def _density_fields(space, params, mean, theta):
    f, _ = truncated_normal_density(space, mean, theta)
    return make_fields(
        space,
        beta=params["beta"],
        gamma=params["gamma"],
        sigma=params["sigma"],
        f=f,
    )


def _exp_hom(spec, out, sim, boundary, default_fraction):
    params = {**PARAM_DEFAULTS, **spec.parameters}
    space, fields = _homogeneous_setup(params)
    drift = SeparablePowerDrift(
        rate=params["eps"], exponent=float(params.get("r", 1.0)), beta_shape=fields.beta
    )
    config = _sim_config(sim, noise_mode=NoiseMode.SHARED, boundary_mode=boundary)
    fraction = float(params.get("fit_fraction", default_fraction))
    files, _ = _variance_run(
        out, "", space, fields, drift, config, fraction, sim["n_jobs"]
    )
    return files


def _exp_hom_free(spec, out, sim):
    return _exp_hom(spec, out, sim, BoundaryMode.FREE, 0.8)


def _exp_hom_clamped(spec, out, sim):
    return _exp_hom(spec, out, sim, BoundaryMode.CLAMPED, 0.9)


def _default_n_grid():
    return list(np.unique(np.rint(np.geomspace(2, 100, 12)).astype(int)))


def _exp_discrete_n_sweep(spec, out, sim):
    params = {**PARAM_DEFAULTS, **spec.parameters}
    grid = params.get("sweep", {}).get("n", _default_n_grid())
    if not len(grid):
        raise InvalidArgumentError("sweep.n must be non-empty")
    theta = theta_of_p(float(params["p"]))
    fraction = float(params.get("fit_fraction", 0.9))
    files, entries = [], []
    for n in grid:
        space = make_discrete_space(int(n))
        fields = _density_fields(space, params, params["mean"], theta)
        drift = SeparablePowerDrift(rate=params["eps"], exponent=1.0, beta_shape=fields.beta)
        config = _sim_config(
            sim, noise_mode=NoiseMode.INDEPENDENT, boundary_mode=BoundaryMode.CLAMPED
        )
        run_files, fit = _variance_run(
            out, f"_n{int(n)}", space, fields, drift, config, fraction, sim["n_jobs"]
        )
        files += run_files
        entries.append((int(n), fit))
    return files + _sweep_files(out, entries)


def _default_p_grid():
    return [round(0.05 + 0.1 * k, 2) for k in range(10)]


def _exp_continuous_p_sweep(spec, out, sim, boundary=BoundaryMode.CLAMPED, default_fraction=0.9):
    params = {**PARAM_DEFAULTS, **spec.parameters}
    grid = params.get("sweep", {}).get("p", _default_p_grid())
    if not len(grid):
        raise InvalidArgumentError("sweep.p must be non-empty")
    space = make_quadrature_space(int(params["m"]))
    fraction = float(params.get("fit_fraction", default_fraction))
    files, entries = [], []
    for p in grid:
        fields = _density_fields(space, params, params["mean"], theta_of_p(float(p)))
        drift = SeparablePowerDrift(rate=params["eps"], exponent=1.0, beta_shape=fields.beta)
        config = _sim_config(sim, noise_mode=NoiseMode.SHARED, boundary_mode=boundary)
        run_files, fit = _variance_run(
            out, f"_p{p:g}", space, fields, drift, config, fraction, sim["n_jobs"]
        )
        files += run_files
        entries.append((float(p), fit))
    return files + _sweep_files(out, entries)


def _exp_continuous_p_sweep_free(spec, out, sim):
    return _exp_continuous_p_sweep(spec, out, sim, BoundaryMode.FREE, 0.8)


def _default_mu_grid():
    return [round(0.125 * k, 3) for k in range(9)]


def _exp_nonseparable_mu_sweep(spec, out, sim):
    params = {**PARAM_DEFAULTS, **spec.parameters}
    grid = params.get("sweep", {}).get("mu", _default_mu_grid())
    if not len(grid):
        raise InvalidArgumentError("sweep.mu must be non-empty")
    space = make_quadrature_space(int(params["m"]))
    fraction = float(params.get("fit_fraction", 0.9))
    drift = NonSeparableDrift(rate=params["eps"])
    files, entries = [], []
    for mu in grid:
        fields = _density_fields(space, params, float(mu), 0.1)
        config = _sim_config(sim, noise_mode=NoiseMode.SHARED, boundary_mode=BoundaryMode.CLAMPED)
        run_files, fit = _variance_run(
            out, f"_mu{mu:g}", space, fields, drift, config, fraction, sim["n_jobs"]
        )
        files += run_files
        entries.append((float(mu), fit))
    return files + _sweep_files(out, entries)


def _exp_drift_exponent_sweep(spec, out, sim):
    params = {**PARAM_DEFAULTS, **spec.parameters}
    grid = params.get("sweep", {}).get("r", [0.8, 1.5])
    if not len(grid):
        raise InvalidArgumentError("sweep.r must be non-empty")
    space, fields = _homogeneous_setup(params)
    fraction = float(params.get("fit_fraction", 0.9))
    files, entries = [], []
    for r_exp in grid:
        drift = SeparablePowerDrift(
            rate=params["eps"], exponent=float(r_exp), beta_shape=fields.beta
        )
        config = _sim_config(sim, noise_mode=NoiseMode.SHARED, boundary_mode=BoundaryMode.CLAMPED)
        run_files, fit = _variance_run(
            out, f"_r{r_exp:g}", space, fields, drift, config, fraction, sim["n_jobs"]
        )
        files += run_files
        entries.append((float(r_exp), fit))
    return files + _sweep_files(out, entries)


def _exp_lambda_curves(spec, out, sim):
    """Leading eigenvalue along the drift for trait densities centered at mu."""
    params = {**PARAM_DEFAULTS, **spec.parameters}
    grid = params.get("sweep", {}).get("mu", [0.0, 0.5, 1.0])
    space = make_quadrature_space(int(params["m"]))
    drift = NonSeparableDrift(rate=params["eps"])
    n_grid = int(params.get("n_times", 200))
    files, residuals = [], []
    for mu in grid:
        fields = _density_fields(space, params, float(mu), 0.1)
        tc = t_crit(drift, space, fields)
        times = tc * np.arange(1, n_grid + 1) / n_grid
        gamma_const = float(fields.gamma[0])
        uniform_gamma = bool(np.all(fields.gamma == gamma_const))
        lam = np.empty(n_grid)
        for k, t in enumerate(times):
            beta_t = drift.rate * t ** (space.nodes + 0.5)
            if uniform_gamma:
                lam[k] = float(
                    np.sum(space.weights * fields.q * fields.f * beta_t) - gamma_const
                )
            else:
                shifted = ModelFields(
                    beta=beta_t,
                    gamma=fields.gamma,
                    q=fields.q,
                    eta=fields.eta,
                    sigma=fields.sigma,
                    f=fields.f,
                )
                lam[k] = leading_eigenvalue(space, shifted)
        name = f"lambda_mu{mu:g}.csv"
        emit_csv(times, {"lambda": lam}, out / name)
        files.append(name)
        residuals.append({"mu": float(mu), "t_crit": tc, "lambda_at_tcrit": float(lam[-1])})
    _write_json(residuals, out / "lambda_residuals.json")
    return files + ["lambda_residuals.json"]


def _exp_normalization_curve(spec, out, sim):
    """Normalization constant C(n) of the trait density on growing node counts."""
    params = {**PARAM_DEFAULTS, **spec.parameters}
    theta = theta_of_p(float(params["p"]))
    n_values = params.get("sweep", {}).get("n", list(range(2, 101)))
    c_values = []
    for n in n_values:
        space = make_discrete_space(int(n))
        _, c = truncated_normal_density(space, params["mean"], theta)
        c_values.append(c)
    emit_csv(
        np.asarray(n_values, dtype=np.int64),
        {"C": np.asarray(c_values)},
        out / "normalization.csv",
    )
    return ["normalization.csv"]


def _exp_density_plot(spec, out, sim):
    params = {**PARAM_DEFAULTS, **spec.parameters}
    p_values = params.get("sweep", {}).get("p", [0.05, 0.2, 0.35, 0.5, 0.65, 0.8, 0.95])
    space = make_quadrature_space(int(params["m"]))
    series = {}
    for p in p_values:
        f, _ = truncated_normal_density(space, params["mean"], theta_of_p(float(p)))
        series[f"f_p{p:g}"] = f
    emit_csv(space.nodes, series, out / "density.csv")
    return ["density.csv"]


def _exp_mean_path(spec, out, sim):
    """Ensemble means with and without clamping, plus one sample path."""
    params = {**PARAM_DEFAULTS, **spec.parameters}
    space, fields = _homogeneous_setup(params)
    drift = SeparablePowerDrift(rate=params["eps"], exponent=1.0, beta_shape=fields.beta)
    free = simulate_ensemble(
        space,
        fields,
        drift,
        _sim_config(sim, noise_mode=NoiseMode.SHARED, boundary_mode=BoundaryMode.FREE),
        n_jobs=sim["n_jobs"],
    )
    clamped = simulate_ensemble(
        space,
        fields,
        drift,
        _sim_config(sim, noise_mode=NoiseMode.SHARED, boundary_mode=BoundaryMode.CLAMPED),
        n_jobs=sim["n_jobs"],
    )
    sample = simulate_path(
        space,
        fields,
        drift,
        _sim_config(sim, noise_mode=NoiseMode.SHARED, boundary_mode=BoundaryMode.FREE),
        path_index=0,
    )
    k = free.times.size  # free side may be truncated if every path diverged
    emit_csv(
        free.times,
        {
            "mean_free": free.mean_path,
            "count_free": free.counts,
            "mean_clamped": clamped.mean_path[:k],
            "sample_free": sample.values[:k],
        },
        out / "mean_path.csv",
    )
    return ["mean_path.csv"]


EXPERIMENTS = {
    "hom_free": _exp_hom_free,
    "hom_clamped": _exp_hom_clamped,
    "discrete_n_sweep": _exp_discrete_n_sweep,
    "continuous_p_sweep": _exp_continuous_p_sweep,
    "continuous_p_sweep_free": _exp_continuous_p_sweep_free,
    "nonseparable_mu_sweep": _exp_nonseparable_mu_sweep,
    "drift_exponent_sweep": _exp_drift_exponent_sweep,
    "lambda_curves": _exp_lambda_curves,
    "normalization_curve": _exp_normalization_curve,
    "density_plot": _exp_density_plot,
    "mean_path": _exp_mean_path,
}


def run_experiment(spec: ExperimentSpec) -> RunRecord:
    """Execute a named experiment and write its artifacts plus a manifest."""
    out = Path(spec.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    sim = _resolve_sim(spec.sim)
    with _output_lock(out):
        rel_files = EXPERIMENTS[spec.name](spec, out, sim)
        manifest_files = []
        for rel in sorted(rel_files):
            data = (out / rel).read_bytes()
            manifest_files.append(
                {
                    "path": rel,
                    "sha256": hashlib.sha256(data).hexdigest(),
                    "bytes": len(data),
                }
            )
        record = RunRecord(
            spec_hash=spec_hash(spec),
            seed=int(sim["seed"]),
            version=__version__,
            files=tuple(tuple(sorted(f.items())) for f in manifest_files),
        )
        _write_json(
            {
                "name": spec.name,
                "spec_hash": record.spec_hash,
                "seed": record.seed,
                "version": record.version,
                "files": manifest_files,
            },
            out / "manifest.json",
        )
    return record


# --- fields files for the steady/r0 subcommands ---


def load_fields_file(path) -> tuple[HeterogeneitySpace, ModelFields]:
    """Build (space, fields) from a TOML description.

    [space] kind = "discrete"|"quadrature" with n or m; optional [density]
    with mean and p or theta; [fields] with beta, gamma and optional q, eta,
    sigma (scalars or per-node lists).
    """
    with open(path, "rb") as fh:
        doc = tomllib.load(fh)
    try:
        space_sec = doc["space"]
        fields_sec = doc["fields"]
    except KeyError as exc:
        raise InvalidArgumentError(f"fields file needs a {exc.args[0]!r} section") from None
    kind = space_sec.get("kind", "quadrature")
    if kind == "discrete":
        space = make_discrete_space(int(space_sec.get("n", 10)))
    elif kind in ("quadrature", "continuous"):
        space = make_quadrature_space(int(space_sec.get("m", 100)))
    else:
        raise InvalidArgumentError(f"unknown space kind {kind!r}")

    f = None
    density = doc.get("density")
    if density:
        theta = density.get("theta")
        if theta is None:
            theta = theta_of_p(float(density["p"]))
        f, _ = truncated_normal_density(space, float(density.get("mean", 0.5)), float(theta))

    if "beta" not in fields_sec or "gamma" not in fields_sec:
        raise InvalidArgumentError("fields section must set beta and gamma")
    fields = make_fields(
        space,
        beta=fields_sec["beta"],
        gamma=fields_sec["gamma"],
        q=fields_sec.get("q", 1.0),
        eta=fields_sec.get("eta", 0.0),
        sigma=fields_sec.get("sigma", 0.0),
        f=f,
    )
    return space, fields


# --- CLI ---


def _cli_run(args) -> int:
    spec = ExperimentSpec.from_file(args.spec)
    sim = dict(spec.sim)
    if args.seed is not None:
        sim["seed"] = args.seed
    if args.paths is not None:
        sim["n_paths"] = args.paths
    if args.jobs is not None:
        sim["n_jobs"] = args.jobs
    out_dir = args.out if args.out is not None else spec.output_dir
    spec = ExperimentSpec(spec.name, spec.parameters, sim, str(out_dir))
    record = run_experiment(spec)
    print(f"{spec.name}: wrote {len(record.files)} files to {spec.output_dir}")
    print(f"spec_hash={record.spec_hash} seed={record.seed} version={record.version}")
    return 0


def _cli_fit(args) -> int:
    with open(args.csv, encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise InvalidArgumentError("empty CSV")
        rows = [row for row in reader if row]
    t_col = header.index("t") if "t" in header else 0
    if "var" in header:
        v_col = header.index("var")
    elif len(header) > 1:
        v_col = 1
    else:
        raise InvalidArgumentError("CSV needs a 'var' column or at least two columns")
    times = np.array([float(row[t_col]) for row in rows])
    var = np.array([float(row[v_col]) for row in rows])
    keep = times < args.tcrit * (1.0 - 1e-12)
    fit = fit_power_law(times[keep], var[keep], args.tcrit, args.fraction)
    print(json.dumps(_canonical(fit.as_dict()), indent=2, sort_keys=True))
    return 0


def _cli_steady(args) -> int:
    space, fields = load_fields_file(args.fields)
    states = solve_steady_states(space, fields)
    payload = [
        {"j_hat": s.j_hat, "stable": s.stable, "i_hat_max": float(np.max(s.i_hat))}
        for s in states
    ]
    print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


def _cli_r0(args) -> int:
    space, fields = load_fields_file(args.fields)
    print(repr(r0(space, fields)))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hetsis",
        description="Heterogeneous stochastic SIS experiments and analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a named experiment from a TOML spec")
    p_run.add_argument("spec", help="experiment spec file")
    p_run.add_argument("--seed", type=int, default=None, help="override master seed")
    p_run.add_argument("--paths", type=int, default=None, help="override ensemble size")
    p_run.add_argument("--out", default=None, help="override output directory")
    p_run.add_argument("--jobs", type=int, default=None, help="worker processes")
    p_run.set_defaults(func=_cli_run)

    p_fit = sub.add_parser("fit", help="fit the scaling law to a variance CSV")
    p_fit.add_argument("csv", help="CSV with t and var columns")
    p_fit.add_argument("--tcrit", type=float, required=True)
    p_fit.add_argument("--fraction", type=float, default=0.9)
    p_fit.set_defaults(func=_cli_fit)

    p_steady = sub.add_parser("steady", help="steady states of a fields file")
    p_steady.add_argument("fields")
    p_steady.set_defaults(func=_cli_steady)

    p_r0 = sub.add_parser("r0", help="basic reproduction number of a fields file")
    p_r0.add_argument("fields")
    p_r0.set_defaults(func=_cli_r0)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (NoCrossingError, InternalSolverError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except (HetsisError, ValueError, KeyError, OSError, tomllib.TOMLDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
