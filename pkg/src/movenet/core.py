"""Movement process: a Gaussian Markov random field on each time step.

Positions are stored as ``(n, T, 2)`` arrays and networks as ``(n, n, T)``
binary arrays. Whenever a per-step vector of all coordinates is needed the
``(x, y)`` pair of each individual is interleaved, so the precision of a
step is ``Q0 (x) I_2`` scaled by ``1 / sigma2``.

Two conventions exist for the ego-network used in the attraction term of
the step ``t-1 -> t``: ``ego="previous"`` uses ``W(t-1)`` (the default) and
``ego="current"`` uses ``W(t)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

LOG_2PI = np.log(2.0 * np.pi)
EGO_CONVENTIONS = ("previous", "current")


class IsolatedIndividualError(ValueError):
    """Raised when an ego-network quantity is requested for a node of degree 0."""


@dataclass
class TrajectoryGrid:
    """Positions of ``n`` individuals on a regular grid of ``T`` times."""

    positions: np.ndarray
    time_step: float = 1.0
    individual_ids: list = field(default=None)
    start: float = 0.0

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        if self.positions.ndim != 3 or self.positions.shape[2] != 2:
            raise ValueError("positions must have shape (n, T, 2)")
        n, T, _ = self.positions.shape
        if n < 2 or T < 2:
            raise ValueError(f"need n >= 2 and T >= 2, got n={n}, T={T}")
        if not np.all(np.isfinite(self.positions)):
            raise ValueError("positions must be finite")
        if not self.time_step > 0:
            raise ValueError("time_step must be positive")
        if self.individual_ids is None:
            self.individual_ids = [str(i + 1) for i in range(n)]
        self.individual_ids = [str(i) for i in self.individual_ids]
        if len(self.individual_ids) != n:
            raise ValueError("one id per individual required")

    @property
    def n(self) -> int:
        return self.positions.shape[0]

    @property
    def T(self) -> int:
        return self.positions.shape[1]

    @property
    def times(self) -> np.ndarray:
        return self.start + self.time_step * np.arange(self.T)


@dataclass
class DynamicNetwork:
    """Binary, symmetric, loop-free edge indicators of shape ``(n, n, T)``."""

    edges: np.ndarray

    def __post_init__(self):
        edges = np.asarray(self.edges)
        if edges.ndim == 2:
            edges = edges[:, :, None]
        if edges.ndim != 3 or edges.shape[0] != edges.shape[1]:
            raise ValueError("edges must have shape (n, n, T)")
        if not np.all((edges == 0) | (edges == 1)):
            raise ValueError("edges must be binary")
        edges = edges.astype(np.int8)
        if not np.array_equal(edges, edges.transpose(1, 0, 2)):
            raise ValueError("edges must be symmetric at every time")
        if np.any(np.diagonal(edges, axis1=0, axis2=1)):
            raise ValueError("edges must have a zero diagonal")
        self.edges = edges

    @property
    def n(self) -> int:
        return self.edges.shape[0]

    @property
    def T(self) -> int:
        return self.edges.shape[2]


@dataclass
class ModelParams:
    """Scalar parameters of the movement and network processes."""

    alpha: float
    beta: float
    p1: float
    phi: float
    c: float
    sigma2: float

    def __post_init__(self):
        for name in ("alpha", "beta", "p1", "phi", "c", "sigma2"):
            value = float(getattr(self, name))
            if not np.isfinite(value):
                raise ValueError(f"{name} must be finite")
            setattr(self, name, value)
        if not -1.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (-1, 1), got {self.alpha}")
        if not 0.0 < self.p1 < 1.0:
            raise ValueError(f"p1 must lie in (0, 1), got {self.p1}")
        if not 0.0 <= self.phi < 1.0:
            raise ValueError(f"phi must lie in [0, 1), got {self.phi}")
        if not self.c > 0:
            raise ValueError(f"c must be strictly positive, got {self.c}")
        if not self.sigma2 > 0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")

    @property
    def p_1_given_0(self) -> float:
        return (1.0 - self.phi) * self.p1

    @property
    def p_1_given_1(self) -> float:
        return 1.0 - (1.0 - self.phi) * (1.0 - self.p1)

    def replace(self, **changes) -> "ModelParams":
        values = {k: getattr(self, k) for k in ("alpha", "beta", "p1", "phi", "c", "sigma2")}
        values.update(changes)
        return ModelParams(**values)


def _positions(mu) -> np.ndarray:
    if isinstance(mu, TrajectoryGrid):
        return mu.positions
    return np.asarray(mu, dtype=float)


def _edges(W) -> np.ndarray:
    if isinstance(W, DynamicNetwork):
        return W.edges
    return np.asarray(W)


def _check_ego(ego: str):
    if ego not in EGO_CONVENTIONS:
        raise ValueError(f"ego must be one of {EGO_CONVENTIONS}, got {ego!r}")


def ego_size(W, i: int, t: int, c: float) -> float:
    """Degree of ``i`` at time ``t``, or ``c`` if ``i`` is isolated."""
    edges = _edges(W)
    n, _, T = edges.shape
    if not (0 <= i < n and 0 <= t < T):
        raise IndexError(f"index (i={i}, t={t}) out of range for n={n}, T={T}")
    if not c > 0:
        raise ValueError("c must be strictly positive")
    degree = float(edges[i, :, t].sum())
    return degree if degree > 0 else float(c)


def ego_mean(mu, W, i: int, t: int) -> np.ndarray:
    """Average position at time ``t`` of the individuals connected to ``i``."""
    pos = _positions(mu)
    w = _edges(W)[i, :, t].astype(float)
    degree = w.sum()
    if degree == 0:
        raise IsolatedIndividualError(f"individual {i} has no connections at t={t}")
    return w @ pos[:, t, :] / degree


def _unit_vectors(pos: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Attraction directions for every individual.

    ``pos`` is ``(n, 2)`` and ``w`` an ``(n, n)`` slice. Isolated individuals
    and individuals sitting exactly on their ego-network centroid get 0.
    """
    w = np.asarray(w, dtype=float)
    degree = w.sum(axis=1)
    out = np.zeros_like(pos)
    has = degree > 0
    if not np.any(has):
        return out
    centroid = (w[has] @ pos) / degree[has, None]
    gap = centroid - pos[has]
    norm = np.hypot(gap[:, 0], gap[:, 1])
    nz = norm > 0
    gap[nz] /= norm[nz, None]
    gap[~nz] = 0.0
    out[has] = gap
    return out


def attraction_direction(mu, W, i: int, t: int) -> np.ndarray:
    """Unit vector from ``i`` toward its ego-network centroid at time ``t``."""
    pos = _positions(mu)[:, t, :]
    return _unit_vectors(pos, _edges(W)[:, :, t])[i]


def precision_q0(w_now, alpha: float, c: float) -> np.ndarray:
    """The ``n x n`` precision factor without ``sigma2`` and the ``I_2`` block."""
    w = np.asarray(w_now, dtype=float)
    degree = w.sum(axis=1)
    q0 = -alpha * w
    np.fill_diagonal(q0, np.where(degree > 0, degree, c))
    return q0


def build_precision(W_now, params: ModelParams) -> np.ndarray:
    """Full ``2n x 2n`` precision of one movement step.

    Rows and columns are ordered ``(x_1, y_1, x_2, y_2, ...)``.
    """
    if not abs(params.alpha) < 1:
        raise ValueError(f"|alpha| must be < 1 for a proper GMRF, got {params.alpha}")
    w = np.asarray(W_now)
    if not np.array_equal(w, w.T) or np.any(np.diag(w)):
        raise ValueError("network slice must be symmetric with a zero diagonal")
    q0 = precision_q0(w, params.alpha, params.c)
    return np.kron(q0, np.eye(2)) / params.sigma2


def _attraction_slice(W, t: int, ego: str) -> np.ndarray:
    """Network slice that drives attraction in the step ``t-1 -> t``."""
    _check_ego(ego)
    edges = _edges(W)
    return edges[:, :, t - 1] if ego == "previous" else edges[:, :, t]


def joint_step_mean(mu_prev, w_attract, params: ModelParams) -> np.ndarray:
    """Mean ``(n, 2)`` of all positions one step after ``mu_prev``.

    ``w_attract`` is the slice selected by the ego-network convention;
    alignment lives entirely in the precision, not here.
    """
    mu_prev = np.asarray(mu_prev, dtype=float)
    return mu_prev + params.beta * _unit_vectors(mu_prev, w_attract)


def conditional_mean(mu_prev, mu_others_now, W_now, W_prev, params: ModelParams, i: int,
                     ego: str = "previous") -> np.ndarray:
    """Mean of ``mu_i(t)`` given every other position at ``t`` and all of ``t-1``.

    ``mu_others_now`` holds the ``n - 1`` current positions of the other
    individuals in index order with ``i`` removed.
    """
    _check_ego(ego)
    mu_prev = np.asarray(mu_prev, dtype=float)
    n = mu_prev.shape[0]
    w_now = np.asarray(W_now, dtype=float)
    w_attract = np.asarray(W_prev if ego == "previous" else W_now)
    step_mean = joint_step_mean(mu_prev, w_attract, params)

    others = [j for j in range(n) if j != i]
    now = np.asarray(mu_others_now, dtype=float).reshape(n - 1, 2)
    degree = w_now[i].sum()
    size = degree if degree > 0 else params.c
    weights = params.alpha * w_now[i, others] / size
    return step_mean[i] + weights @ (now - step_mean[others])


def _step_log_density(d: np.ndarray, q0: np.ndarray, sigma2: float) -> float:
    n = q0.shape[0]
    L = np.linalg.cholesky(q0)
    logdet_q0 = 2.0 * np.sum(np.log(np.diag(L)))
    quad = np.sum(d * (q0 @ d))
    return -n * LOG_2PI - n * np.log(sigma2) + logdet_q0 - 0.5 * quad / sigma2


def step_log_density(mu, W, params: ModelParams, t: int, ego: str = "previous") -> float:
    """Log density of the positions at ``t`` (``t >= 1``) given those at ``t-1``."""
    pos = _positions(mu)
    edges = _edges(W)
    mean = joint_step_mean(pos[:, t - 1, :], _attraction_slice(edges, t, ego), params)
    q0 = precision_q0(edges[:, :, t], params.alpha, params.c)
    return _step_log_density(pos[:, t, :] - mean, q0, params.sigma2)


def movement_log_density(mu, W, params: ModelParams, ego: str = "previous") -> float:
    """Joint log density of steps ``2..T``; the first positions are conditioned on."""
    pos = _positions(mu)
    edges = _edges(W)
    if pos.shape[0] != edges.shape[0] or pos.shape[1] != edges.shape[2]:
        raise ValueError("positions and network have inconsistent shapes")
    if not abs(params.alpha) < 1:
        raise ValueError("|alpha| must be < 1")
    total = 0.0
    for t in range(1, pos.shape[1]):
        try:
            total += step_log_density(pos, edges, params, t, ego)
        except np.linalg.LinAlgError as exc:
            raise FloatingPointError(f"precision not positive definite at t={t}") from exc
    return total


def simulate_step(mu_prev, W_prev, W_now, params: ModelParams, rng: np.random.Generator,
                  ego: str = "previous") -> np.ndarray:
    """Exact draw of all positions one step ahead."""
    _check_ego(ego)
    if not abs(params.alpha) < 1:
        raise ValueError(f"|alpha| must be < 1, got {params.alpha}")
    mu_prev = np.asarray(mu_prev, dtype=float)
    mean = joint_step_mean(mu_prev, W_prev if ego == "previous" else W_now, params)
    q0 = precision_q0(W_now, params.alpha, params.c)
    L = np.linalg.cholesky(q0)
    z = rng.standard_normal(mean.shape)
    # Q0 = L L^T, so L^T x = z gives x with covariance Q0^{-1}; x and y columns independent.
    return mean + np.sqrt(params.sigma2) * np.linalg.solve(L.T, z)


def simulate_paths(params: ModelParams, n: int, T: int, mu1, rng: np.random.Generator,
                   W: DynamicNetwork | None = None, ego: str = "previous",
                   time_step: float = 1.0,
                   individual_ids: Sequence[str] | None = None):
    """Simulate a trajectory (and, unless given, the network driving it)."""
    from .network import simulate_network

    if W is None:
        W = simulate_network(params.p1, params.phi, n, T, rng)
    elif not isinstance(W, DynamicNetwork):
        W = DynamicNetwork(W)
    if W.n != n or W.T != T:
        raise ValueError("network shape does not match (n, T)")
    pos = np.empty((n, T, 2))
    pos[:, 0, :] = np.asarray(mu1, dtype=float).reshape(n, 2)
    edges = W.edges
    for t in range(1, T):
        pos[:, t, :] = simulate_step(pos[:, t - 1, :], edges[:, :, t - 1], edges[:, :, t],
                                     params, rng, ego)
    grid = TrajectoryGrid(pos, time_step=time_step, individual_ids=individual_ids)
    return grid, W
