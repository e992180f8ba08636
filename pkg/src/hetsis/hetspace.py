"""Trait spaces, per-node model fields, and trait densities.

A population is described by a trait value omega in [0, 1] carrying a
probability measure. Two discretizations are supported: a counting measure on
n evenly spaced nodes i/(n-1) with weights 1/n, and a midpoint quadrature on m
cells with nodes (i+0.5)/m and weights 1/m. Averages over the population are
plain weighted sums, written <.> throughout the package.

Model fields live on the nodes: transmission beta, recovery gamma, coupling
weight q, external infection eta, noise amplitude sigma, and the susceptible
ceiling f. Normalization conventions: weights sum to 1, <f> = 1, <q f> = 1.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateInputError, InvalidArgumentError

WEIGHT_SUM_TOL = 1e-12
NORMALIZATION_TOL = 1e-10
RATE_FLOOR = 1e-12


class SpaceKind(enum.Enum):
    DISCRETE_COUNTING = "discrete_counting"
    CONTINUOUS_QUADRATURE = "continuous_quadrature"


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidArgumentError(f"{name} must be a non-empty 1-D array")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} must be finite")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class HeterogeneitySpace:
    """Nodes and weights of a discretized trait space.

    Invariants checked at construction: nodes strictly increasing in [0, 1],
    weights positive, weights summing to 1 within 1e-12.
    """

    nodes: np.ndarray
    weights: np.ndarray
    kind: SpaceKind

    def __post_init__(self):
        object.__setattr__(self, "nodes", _frozen_array(self.nodes, "nodes"))
        object.__setattr__(self, "weights", _frozen_array(self.weights, "weights"))
        if self.nodes.shape != self.weights.shape:
            raise InvalidArgumentError("nodes and weights must have equal length")
        if np.any(self.nodes < 0.0) or np.any(self.nodes > 1.0):
            raise InvalidArgumentError("nodes must lie in [0, 1]")
        if self.nodes.size > 1 and np.any(np.diff(self.nodes) <= 0.0):
            raise InvalidArgumentError("nodes must be strictly increasing")
        if np.any(self.weights <= 0.0):
            raise InvalidArgumentError("weights must be positive")
        if abs(float(np.sum(self.weights)) - 1.0) > WEIGHT_SUM_TOL:
            raise InvalidArgumentError("weights must sum to 1 within 1e-12")

    @property
    def n_nodes(self) -> int:
        return int(self.nodes.size)

    def __len__(self) -> int:
        return self.n_nodes

    def integrate(self, values) -> float:
        """Population average <values> under the space's measure."""
        values = np.asarray(values, dtype=np.float64)
        if values.shape != self.nodes.shape:
            raise InvalidArgumentError("values must match the node count")
        return float(np.sum(self.weights * values))


def make_discrete_space(n: int) -> HeterogeneitySpace:
    """Counting measure on n nodes i/(n-1), i = 0..n-1, each with weight 1/n."""
    if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
        raise InvalidArgumentError("n must be an integer")
    if n < 2:
        raise InvalidArgumentError("discrete space needs n >= 2 nodes")
    nodes = np.arange(n, dtype=np.float64) / (n - 1)
    weights = np.full(n, 1.0 / n)
    return HeterogeneitySpace(nodes, weights, SpaceKind.DISCRETE_COUNTING)


def make_quadrature_space(m: int = 100) -> HeterogeneitySpace:
    """Midpoint rule on [0, 1]: m cells, nodes (i+0.5)/m, weights 1/m."""
    if not isinstance(m, (int, np.integer)) or isinstance(m, bool):
        raise InvalidArgumentError("m must be an integer")
    if m < 1:
        raise InvalidArgumentError("quadrature space needs m >= 1 cells")
    nodes = (np.arange(m, dtype=np.float64) + 0.5) / m
    weights = np.full(m, 1.0 / m)
    return HeterogeneitySpace(nodes, weights, SpaceKind.CONTINUOUS_QUADRATURE)


def theta_of_p(p: float) -> float:
    """Width parameter of the heterogeneity scale p in (0, 1).

    theta = 1/(2p - 2)^2 - 1/4, monotone increasing: p -> 0 concentrates the
    density (delta-like), p -> 1 flattens it toward the constant density.
    """
    p = float(p)
    if not 0.0 < p < 1.0:
        raise InvalidArgumentError("p must lie strictly between 0 and 1")
    return 1.0 / (2.0 * p - 2.0) ** 2 - 0.25


def truncated_normal_density(
    space: HeterogeneitySpace, mean: float, theta: float
) -> tuple[np.ndarray, float]:
    """Normal density with scale theta centered at mean, renormalized on the space.

    Returns (f, C): per-node density values f with <f> = 1, and the
    normalization constant C = <phi_theta(. - mean)> that was divided out.
    Raises DegenerateInputError if the kernel mass underflows to zero on every
    node (theta far too small for the grid).
    """
    mean = float(mean)
    theta = float(theta)
    if not math.isfinite(mean):
        raise InvalidArgumentError("mean must be finite")
    if not (math.isfinite(theta) and theta > 0.0):
        raise InvalidArgumentError("theta must be positive")
    z = (space.nodes - mean) / theta
    raw = np.exp(-0.5 * z * z) / (math.sqrt(2.0 * math.pi) * theta)
    c = float(np.sum(space.weights * raw))
    if c <= 0.0:
        raise DegenerateInputError("density mass underflowed on every node")
    return raw / c, c


def normalize_q(space: HeterogeneitySpace, q_raw, f) -> np.ndarray:
    """Rescale a raw coupling profile so that <q f> = 1."""
    q_raw = np.broadcast_to(np.asarray(q_raw, dtype=np.float64), space.nodes.shape)
    f = np.asarray(f, dtype=np.float64)
    if f.shape != space.nodes.shape:
        raise InvalidArgumentError("f must match the node count")
    if np.any(q_raw < 0.0) or not np.all(np.isfinite(q_raw)):
        raise InvalidArgumentError("q_raw must be finite and non-negative")
    s = float(np.sum(space.weights * q_raw * f))
    if s <= 0.0:
        raise DegenerateInputError("<q_raw f> vanishes; cannot normalize q")
    return q_raw / s


@dataclass(frozen=True)
class DensityParams:
    """Parameters of the truncated-normal trait density.

    theta must be positive and mean must lie in [0, 1]. When p is given it
    must be consistent with theta via theta_of_p.
    """

    mean: float
    theta: float
    p: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.mean) and 0.0 <= self.mean <= 1.0):
            raise InvalidArgumentError("mean must lie in [0, 1]")
        if not (math.isfinite(self.theta) and self.theta > 0.0):
            raise InvalidArgumentError("theta must be positive")
        if self.p is not None:
            expected = theta_of_p(self.p)
            if not math.isclose(self.theta, expected, rel_tol=1e-12, abs_tol=1e-12):
                raise InvalidArgumentError(
                    f"theta={self.theta!r} inconsistent with p={self.p!r} "
                    f"(expected {expected!r})"
                )

    @classmethod
    def from_p(cls, p: float, mean: float = 0.5) -> "DensityParams":
        return cls(mean=mean, theta=theta_of_p(p), p=float(p))


@dataclass(frozen=True)
class ModelFields:
    """Per-node coefficient arrays of the infection model.

    All arrays share the space's node count. Use make_fields to construct
    from scalars or profiles with the normalizations enforced.
    """

    beta: np.ndarray
    gamma: np.ndarray
    q: np.ndarray
    eta: np.ndarray
    sigma: np.ndarray
    f: np.ndarray

    def __post_init__(self):
        for name in ("beta", "gamma", "q", "eta", "sigma", "f"):
            object.__setattr__(self, name, _frozen_array(getattr(self, name), name))
        n = self.beta.size
        for name in ("gamma", "q", "eta", "sigma", "f"):
            if getattr(self, name).size != n:
                raise InvalidArgumentError("field arrays must share one length")

    @property
    def n_nodes(self) -> int:
        return int(self.beta.size)


def validate_fields(space: HeterogeneitySpace, fields: ModelFields) -> None:
    """Check the field invariants on a given space.

    Non-negativity everywhere, beta and gamma at least RATE_FLOOR, f
    non-negative with <f> = 1, and <q f> = 1 (both within 1e-10).
    """
    if fields.n_nodes != space.n_nodes:
        raise InvalidArgumentError("fields and space disagree on node count")
    for name in ("beta", "gamma", "q", "eta", "sigma", "f"):
        if np.any(getattr(fields, name) < 0.0):
            raise InvalidArgumentError(f"{name} must be non-negative")
    if np.any(fields.beta < RATE_FLOOR) or np.any(fields.gamma < RATE_FLOOR):
        raise InvalidArgumentError(f"beta and gamma must be >= {RATE_FLOOR}")
    if abs(space.integrate(fields.f) - 1.0) > NORMALIZATION_TOL:
        raise InvalidArgumentError("<f> must equal 1 within 1e-10")
    if abs(space.integrate(fields.q * fields.f) - 1.0) > NORMALIZATION_TOL:
        raise InvalidArgumentError("<q f> must equal 1 within 1e-10")


def make_fields(
    space: HeterogeneitySpace,
    *,
    beta,
    gamma,
    q=1.0,
    eta=0.0,
    sigma=0.0,
    f=None,
) -> ModelFields:
    """Build validated ModelFields from scalars or per-node profiles.

    f defaults to the constant density 1; q is treated as a raw profile and
    rescaled so <q f> = 1.
    """

    def expand(value, name):
        arr = np.asarray(value, dtype=np.float64)
        if arr.ndim == 0:
            arr = np.full(space.n_nodes, float(arr))
        return _frozen_array(arr, name)

    f_arr = np.ones(space.n_nodes) if f is None else expand(f, "f")
    q_arr = normalize_q(space, expand(q, "q"), f_arr)
    fields = ModelFields(
        beta=expand(beta, "beta"),
        gamma=expand(gamma, "gamma"),
        q=q_arr,
        eta=expand(eta, "eta"),
        sigma=expand(sigma, "sigma"),
        f=f_arr,
    )
    validate_fields(space, fields)
    return fields
