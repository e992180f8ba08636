"""Early-warning scaling law: fit A/(t_crit - t)^alpha to variance series.

The fit is ordinary least squares in linear space over the window
[0, fit_fraction * t_crit]: for fixed alpha the optimal amplitude is the
closed-form A(alpha) = sum(var_k w_k) / sum(w_k^2) with w_k =
(t_crit - t_k)^(-alpha), and the exponent is minimized over the box [0, 3] by
a coarse grid scan (step 0.05) followed by golden-section refinement. The
quasi-stationary theory predicts alpha = 1 with A = sigma^2; boundary effects
push the fitted exponent below 1.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.stats import spearmanr

from .errors import InsufficientDataError, InvalidArgumentError

ALPHA_MAX = 3.0
ALPHA_GRID_STEP = 0.05
ALPHA_TOL = 1e-6
MIN_POINTS = 10

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


@dataclass(frozen=True)
class FitResult:
    """Fitted reference curve A/(t_crit - t)^alpha over one variance series."""

    A: float
    alpha: float
    t_crit: float
    fit_fraction: float
    rss: float
    n_points: int
    degenerate: bool = False

    def as_dict(self) -> dict:
        # the serialized form carries exactly these six keys; degeneracy is
        # recoverable from A == alpha == rss == 0
        return {
            "A": self.A,
            "alpha": self.alpha,
            "t_crit": self.t_crit,
            "fit_fraction": self.fit_fraction,
            "rss": self.rss,
            "n_points": self.n_points,
        }


@dataclass(frozen=True)
class SweepSummary:
    """Per-parameter fit table, sorted by parameter, with trend statistics.

    The Spearman fields are rank correlations of alpha (and A) against the
    sweep parameter; NaN when a correlation is undefined (constant input).
    """

    params: np.ndarray
    amplitudes: np.ndarray
    exponents: np.ndarray
    rss: np.ndarray
    n_points: np.ndarray
    alpha_spearman: float
    amplitude_spearman: float


def _golden_minimize(func, lo: float, hi: float, tol: float) -> float:
    """Golden-section minimum of a unimodal func on [lo, hi]."""
    a, b = lo, hi
    h = b - a
    if h <= tol:
        return 0.5 * (a + b)
    c = b - _INVPHI * h
    d = a + _INVPHI * h
    fc, fd = func(c), func(d)
    while h > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            h = b - a
            c = b - _INVPHI * h
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INVPHI * h
            fd = func(d)
    return 0.5 * (a + b)


def fit_power_law(times, var, t_crit: float, fit_fraction: float = 0.9) -> FitResult:
    """Least-squares fit of A/(t_crit - t)^alpha on [0, fit_fraction*t_crit].

    times must be strictly increasing and below t_crit; var non-negative.
    Needs at least 10 points inside the window. An all-zero variance window
    yields a degenerate flagged result (A = 0, alpha = 0) instead of an error.
    """
    times = np.asarray(times, dtype=np.float64)
    var = np.asarray(var, dtype=np.float64)
    t_crit = float(t_crit)
    fit_fraction = float(fit_fraction)
    if times.ndim != 1 or times.shape != var.shape:
        raise InvalidArgumentError("times and var must be equal-length 1-D arrays")
    if not (np.all(np.isfinite(times)) and np.all(np.isfinite(var))):
        raise InvalidArgumentError("times and var must be finite")
    if times.size > 1 and np.any(np.diff(times) <= 0.0):
        raise InvalidArgumentError("times must be strictly increasing")
    if not (math.isfinite(t_crit) and t_crit > 0.0):
        raise InvalidArgumentError("t_crit must be positive")
    if times.size and times[-1] >= t_crit:
        raise InvalidArgumentError("all times must lie below t_crit")
    if np.any(var < 0.0):
        raise InvalidArgumentError("var must be non-negative")
    if not 0.0 < fit_fraction <= 1.0:
        raise InvalidArgumentError("fit_fraction must lie in (0, 1]")

    mask = times <= fit_fraction * t_crit
    n_points = int(np.count_nonzero(mask))
    if n_points < MIN_POINTS:
        raise InsufficientDataError(
            f"only {n_points} points inside the fit window (need {MIN_POINTS})"
        )
    v = var[mask]
    if not np.any(v > 0.0):
        return FitResult(0.0, 0.0, t_crit, fit_fraction, 0.0, n_points, True)

    log_s = np.log(t_crit - times[mask])

    def amplitude(alpha: float) -> float:
        w = np.exp(-alpha * log_s)
        return float(np.dot(v, w) / np.dot(w, w))

    def rss(alpha: float) -> float:
        w = np.exp(-alpha * log_s)
        a = float(np.dot(v, w) / np.dot(w, w))
        resid = v - a * w
        return float(np.dot(resid, resid))

    grid = np.arange(0.0, ALPHA_MAX + 0.5 * ALPHA_GRID_STEP, ALPHA_GRID_STEP)
    losses = [rss(a) for a in grid]
    best = int(np.argmin(losses))
    lo = grid[max(best - 1, 0)]
    hi = grid[min(best + 1, grid.size - 1)]
    alpha = _golden_minimize(rss, float(lo), float(hi), ALPHA_TOL)
    return FitResult(
        A=amplitude(alpha),
        alpha=alpha,
        t_crit=t_crit,
        fit_fraction=fit_fraction,
        rss=rss(alpha),
        n_points=n_points,
    )


def theoretical_reference(t, t_crit: float, A: float, alpha: float) -> np.ndarray:
    """Reference curve A/(t_crit - t)^alpha evaluated pointwise."""
    t = np.asarray(t, dtype=np.float64)
    if np.any(t >= t_crit):
        raise InvalidArgumentError("all t must lie below t_crit")
    return A / (t_crit - t) ** alpha


def _spearman(x: np.ndarray, y: np.ndarray) -> float:
    if x.size < 2:
        return float("nan")
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        rho = spearmanr(x, y).statistic
    return float(rho)


def sweep_summary(entries) -> SweepSummary:
    """Sorted (param, A, alpha) table with Spearman trend statistics."""
    entries = list(entries)
    if not entries:
        raise InvalidArgumentError("sweep_summary needs at least one entry")
    entries.sort(key=lambda item: float(item[0]))
    params = np.array([float(p) for p, _ in entries])
    fits = [fit for _, fit in entries]
    amplitudes = np.array([fit.A for fit in fits])
    exponents = np.array([fit.alpha for fit in fits])
    rss = np.array([fit.rss for fit in fits])
    n_points = np.array([fit.n_points for fit in fits], dtype=np.int64)
    return SweepSummary(
        params=params,
        amplitudes=amplitudes,
        exponents=exponents,
        rss=rss,
        n_points=n_points,
        alpha_spearman=_spearman(params, exponents),
        amplitude_spearman=_spearman(params, amplitudes),
    )
