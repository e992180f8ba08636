"""Deterministic structure of the heterogeneous infection model.

The node system is

    dI_i/dt = (beta_i J + eta_i) f_i - (beta_i J + eta_i + gamma_i) I_i,
    J(t) = <q I(t, .)> = sum_i mu_i q_i I_i(t),

with population averages <.> taken under the space's weights mu. This module
computes the basic reproduction number R0 = <q f beta/gamma>, classifies and
solves the steady states through the scalar root function

    g(x) = <q f (beta x + eta) / (beta x + eta + gamma)> - x,

finds the leading eigenvalue of the linearization at zero from
<q f beta / (gamma + lambda)> = 1, and integrates trajectories with a
fixed-step classical Runge-Kutta scheme.

g is concave with g(1) < 0, so every root search here is a plain bisection on
a guaranteed bracket. The eigenvalue condition has exactly one root to the
right of -min gamma (the left side blows up at that pole and decays to zero at
infinity); eigenvalues of the alternative essential-spectrum branch are not
computed.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InternalSolverError, InvalidArgumentError
from .hetspace import HeterogeneitySpace, ModelFields

G_ROOT_TOL = 1e-13
EV_ROOT_TOL = 1e-13
BISECT_MAX_ITER = 300

# finite-difference dead band for monotonicity classification
DIFF_BAND = 1e-10


@dataclass(frozen=True)
class SteadyState:
    """A steady state: aggregate j_hat, node profile i_hat, stability flag."""

    j_hat: float
    i_hat: np.ndarray
    stable: bool


@dataclass(frozen=True)
class Trajectory:
    """Fixed-grid solution: times (k,), i_of_t (k, n), j_of_t (k,)."""

    times: np.ndarray
    i_of_t: np.ndarray
    j_of_t: np.ndarray


@dataclass(frozen=True)
class ConvergenceReport:
    limit: float
    onset_time: float | None
    monotone: bool
    status: str  # "ok" or "inconclusive"


def r0(space: HeterogeneitySpace, fields: ModelFields) -> float:
    """Basic reproduction number R0 = <q f beta / gamma>."""
    if np.any(fields.gamma <= 0.0):
        raise InvalidArgumentError("gamma must be positive for R0")
    return float(np.sum(space.weights * fields.q * fields.f * fields.beta / fields.gamma))


def g_eval(x: float, space: HeterogeneitySpace, fields: ModelFields) -> float:
    """Steady-state root function g(x) on [0, 1]."""
    x = float(x)
    if not 0.0 <= x <= 1.0:
        raise InvalidArgumentError("x must lie in [0, 1]")
    num = fields.beta * x + fields.eta
    return float(np.sum(space.weights * fields.q * fields.f * num / (num + fields.gamma))) - x


def _i_hat_of_j(fields: ModelFields, j: float) -> np.ndarray:
    num = fields.beta * j + fields.eta
    return fields.f * num / (num + fields.gamma)


def _bisect_g(space, fields, lo: float, hi: float) -> float:
    """Bisection for g(lo) > 0 > g(hi); returns x with |g(x)| <= 1e-12."""
    glo = g_eval(lo, space, fields)
    ghi = g_eval(hi, space, fields)
    if glo <= 0.0 or ghi >= 0.0:
        raise InternalSolverError("lost the root bracket for g")
    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        gmid = g_eval(mid, space, fields)
        if abs(gmid) <= G_ROOT_TOL or (hi - lo) < 1e-16:
            return mid
        if gmid > 0.0:
            lo = mid
        else:
            hi = mid
    mid = 0.5 * (lo + hi)
    if abs(g_eval(mid, space, fields)) <= 1e-12:
        return mid
    raise InternalSolverError("bisection on g failed to converge")


def solve_steady_states(space: HeterogeneitySpace, fields: ModelFields) -> list[SteadyState]:
    """All steady states with stability flags from the trichotomy.

    With external forcing visible to the coupling (g(0) > 0, i.e. q f eta > 0
    somewhere) there is a single stable state. Without it, j = 0 is a steady
    state, stable exactly when R0 <= 1, and a unique stable endemic state in
    (0, 1) appears when R0 > 1.
    """
    forced = bool(
        np.any(space.weights * fields.q * fields.f * fields.eta > 0.0)
    )
    if forced:
        root = _bisect_g(space, fields, 0.0, 1.0)
        return [SteadyState(root, _i_hat_of_j(fields, root), True)]

    states = [SteadyState(0.0, np.zeros(space.n_nodes), stable=r0(space, fields) <= 1.0)]
    if r0(space, fields) > 1.0:
        # g(0) = 0 and g'(0) = R0 - 1 > 0, so g > 0 just right of zero
        x_lo = 1e-8
        while g_eval(x_lo, space, fields) <= 0.0:
            x_lo *= 1e-2
            if x_lo < 1e-300:
                raise InternalSolverError("could not seed the endemic bracket")
        root = _bisect_g(space, fields, x_lo, 1.0)
        states.append(SteadyState(root, _i_hat_of_j(fields, root), True))
    return states


def leading_eigenvalue(space: HeterogeneitySpace, fields: ModelFields) -> float:
    """Unique root lambda > -min gamma of <q f beta / (gamma + lambda)> = 1.

    eta is ignored: this is the linearization at zero of the unforced system.
    Its sign matches the sign of R0 - 1.
    """
    coeff = space.weights * fields.q * fields.f * fields.beta
    active = coeff > 0.0
    if not np.any(active):
        raise DegenerateInputError("q f beta vanishes everywhere; no eigenvalue")
    pole = -float(np.min(fields.gamma[active]))

    def lhs(lam: float) -> float:
        return float(np.sum(coeff / (fields.gamma + lam)))

    # walk toward the pole until the left side exceeds 1
    eps = max(-pole, 1.0) * 1e-3
    lo = pole + eps
    for _ in range(400):
        if lhs(lo) > 1.0:
            break
        eps *= 0.0625
        lo = pole + eps
        if eps < 1e-300:
            raise InternalSolverError("could not bracket the eigenvalue near the pole")
    else:
        raise InternalSolverError("could not bracket the eigenvalue near the pole")

    hi = float(np.sum(coeff))  # lhs(hi) < 1 since gamma > 0
    if hi <= lo:
        hi = lo + 1.0
    while lhs(hi) >= 1.0:
        hi = pole + 2.0 * (hi - pole)

    for _ in range(BISECT_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if hi - lo <= EV_ROOT_TOL:
            return mid
        if lhs(mid) > 1.0:
            lo = mid
        else:
            hi = mid
    raise InternalSolverError("eigenvalue bisection failed to converge")


def _rhs(space, fields, i_state: np.ndarray) -> np.ndarray:
    j = np.sum(space.weights * fields.q * i_state, axis=-1, keepdims=True)
    a = fields.beta * j + fields.eta
    return a * fields.f - (a + fields.gamma) * i_state


def integrate_deterministic(
    space: HeterogeneitySpace,
    fields: ModelFields,
    i0,
    t_end: float,
    dt: float,
) -> Trajectory:
    """Classical fixed-step RK4 integration of the node system.

    i0 may be a scalar or per-node array with 0 <= i0_i <= f_i. The grid is
    k*dt for k = 0..round(t_end/dt).
    """
    if not dt > 0.0:
        raise InvalidArgumentError("dt must be positive")
    if not t_end > 0.0:
        raise InvalidArgumentError("t_end must be positive")
    i0 = np.broadcast_to(np.asarray(i0, dtype=np.float64), (space.n_nodes,)).copy()
    if np.any(i0 < -1e-12) or np.any(i0 > fields.f + 1e-12):
        raise InvalidArgumentError("i0 must satisfy 0 <= i0_i <= f_i")

    n_steps = max(1, int(round(t_end / dt)))
    i_of_t = np.empty((n_steps + 1, space.n_nodes))
    i_of_t[0] = i0
    state = i0
    for k in range(n_steps):
        k1 = _rhs(space, fields, state)
        k2 = _rhs(space, fields, state + 0.5 * dt * k1)
        k3 = _rhs(space, fields, state + 0.5 * dt * k2)
        k4 = _rhs(space, fields, state + dt * k3)
        state = state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        i_of_t[k + 1] = state

    times = np.arange(n_steps + 1) * dt
    j_of_t = i_of_t @ (space.weights * fields.q)
    return Trajectory(times, i_of_t, j_of_t)


def convergence_diagnostics(traj: Trajectory) -> ConvergenceReport:
    """Late-time behavior of J(t): limit estimate and eventual monotonicity.

    Finite differences within DIFF_BAND of zero are treated as flat. The
    trajectory counts as eventually monotone when the stretch after the last
    sign conflict covers at least half of the recorded span. If J has not
    settled (|J(t_end) - J(t_end/2)| >= 0.01) the report is inconclusive.
    """
    j = np.asarray(traj.j_of_t, dtype=np.float64)
    times = np.asarray(traj.times, dtype=np.float64)
    if j.size < 3:
        return ConvergenceReport(float(j[-1]), None, False, "inconclusive")
    mid = j.size // 2
    if abs(j[-1] - j[mid]) >= 0.01:
        return ConvergenceReport(float(j[-1]), None, False, "inconclusive")

    diffs = np.diff(j)
    signs = np.where(np.abs(diffs) <= DIFF_BAND, 0, np.sign(diffs)).astype(np.int64)
    nonzero = np.nonzero(signs)[0]
    if nonzero.size == 0:
        return ConvergenceReport(float(j[-1]), float(times[0]), True, "ok")

    final_sign = signs[nonzero[-1]]
    conflicts = nonzero[signs[nonzero] != final_sign]
    if conflicts.size == 0:
        onset_idx = 0
    else:
        onset_idx = int(conflicts[-1]) + 1
    onset_time = float(times[onset_idx])
    span = times[-1] - times[0]
    monotone = bool(times[-1] - onset_time >= 0.5 * span)
    return ConvergenceReport(float(j[-1]), onset_time, monotone, "ok")
