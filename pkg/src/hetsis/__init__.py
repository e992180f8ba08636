"""Heterogeneous stochastic SIS dynamics near the epidemic threshold.

Deterministic structure (reproduction number, steady states, leading
eigenvalue), Euler-Maruyama simulation of the fast-slow stochastic system
with shared or per-node noise and optional boundary clamping, and
variance-based early-warning scaling-law fits, plus a reproducible
experiment runner.
"""

__version__ = "0.1.0"

from .detdyn import (
    ConvergenceReport,
    SteadyState,
    Trajectory,
    convergence_diagnostics,
    g_eval,
    integrate_deterministic,
    leading_eigenvalue,
    r0,
    solve_steady_states,
)
from .errors import (
    DegenerateInputError,
    HetsisError,
    InsufficientDataError,
    InternalSolverError,
    InvalidArgumentError,
    NoCrossingError,
    OutputLockError,
)
from .hetspace import (
    DensityParams,
    HeterogeneitySpace,
    ModelFields,
    SpaceKind,
    make_discrete_space,
    make_fields,
    make_quadrature_space,
    normalize_q,
    theta_of_p,
    truncated_normal_density,
    validate_fields,
)
from .stochsim import (
    BoundaryMode,
    EnsembleStats,
    NoiseMode,
    NonSeparableDrift,
    PathResult,
    SeparablePowerDrift,
    SimConfig,
    beta_at,
    ensemble_stats_from_paths,
    simulate_ensemble,
    simulate_path,
    t_crit,
)
from .expctl import (
    ExperimentSpec,
    RunRecord,
    emit_csv,
    load_fields_file,
    main,
    run_experiment,
    spec_hash,
)
from .warnsign import (
    FitResult,
    SweepSummary,
    fit_power_law,
    sweep_summary,
    theoretical_reference,
)

__all__ = [
    "__version__",
    "BoundaryMode",
    "ConvergenceReport",
    "DegenerateInputError",
    "DensityParams",
    "EnsembleStats",
    "ExperimentSpec",
    "FitResult",
    "HeterogeneitySpace",
    "HetsisError",
    "InsufficientDataError",
    "InternalSolverError",
    "InvalidArgumentError",
    "ModelFields",
    "NoCrossingError",
    "NoiseMode",
    "NonSeparableDrift",
    "OutputLockError",
    "PathResult",
    "RunRecord",
    "SeparablePowerDrift",
    "SimConfig",
    "SpaceKind",
    "SteadyState",
    "SweepSummary",
    "Trajectory",
    "beta_at",
    "convergence_diagnostics",
    "emit_csv",
    "ensemble_stats_from_paths",
    "fit_power_law",
    "g_eval",
    "integrate_deterministic",
    "leading_eigenvalue",
    "load_fields_file",
    "main",
    "make_discrete_space",
    "make_fields",
    "make_quadrature_space",
    "normalize_q",
    "r0",
    "run_experiment",
    "simulate_ensemble",
    "simulate_path",
    "solve_steady_states",
    "spec_hash",
    "sweep_summary",
    "t_crit",
    "theoretical_reference",
    "theta_of_p",
    "truncated_normal_density",
    "validate_fields",
]
