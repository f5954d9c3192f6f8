"""Proximity networks: connect two individuals whenever they are closer than R."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DynamicNetwork, TrajectoryGrid, _positions

DEFAULT_RADIUS = 10.0
DEFAULT_RADII = (5.0, 7.5, 10.0, 12.5, 15.0)


@dataclass
class ProximityNetwork:
    """Fraction of imputed path sets in which each pair is within ``radius``."""

    values: np.ndarray
    radius: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 3 or v.shape[0] != v.shape[1]:
            raise ValueError("values must have shape (n, n, T)")
        if np.any(v < 0) or np.any(v > 1):
            raise ValueError("values must lie in [0, 1]")
        self.values = v


def _pairwise_distances(pos: np.ndarray) -> np.ndarray:
    """``(n, n, T)`` Euclidean distances for positions ``(n, T, 2)``."""
    diff = pos[:, None, :, :] - pos[None, :, :, :]
    return np.hypot(diff[..., 0], diff[..., 1])


def proximity_network(mu, R: float) -> DynamicNetwork:
    """Edge at ``(i, j, t)`` iff the two positions are strictly closer than ``R``."""
    if not R > 0:
        raise ValueError("R must be positive")
    dist = _pairwise_distances(_positions(mu))
    edges = (dist < R).astype(np.int8)
    idx = np.arange(edges.shape[0])
    edges[idx, idx, :] = 0
    return DynamicNetwork(edges)


def _draws(bank) -> np.ndarray:
    from .imputation import ImputationBank

    if isinstance(bank, ImputationBank):
        return bank.draws
    if isinstance(bank, TrajectoryGrid):
        return bank.positions[None]
    arr = np.asarray(bank, dtype=float)
    return arr[None] if arr.ndim == 3 else arr


def averaged_proximity(bank, R: float) -> ProximityNetwork:
    draws = _draws(bank)
    if draws.shape[0] == 0:
        raise ValueError("bank is empty")
    total = np.zeros(draws.shape[1:2] * 2 + draws.shape[2:3])
    for k in range(draws.shape[0]):
        total += proximity_network(draws[k], R).edges
    return ProximityNetwork(total / draws.shape[0], float(R))


def mean_density(values) -> float:
    """Mean over pairs ``i < j`` and times of an ``(n, n, T)`` edge array."""
    v = np.asarray(values, dtype=float)
    iu, ju = np.triu_indices(v.shape[0], k=1)
    return float(v[iu, ju, :].mean())


def density_matched_radius(mu_or_bank, target_density: float, R_grid) -> float:
    """Radius in ``R_grid`` whose (bank-averaged) density is closest to the target.

    Ties go to the smallest radius.
    """
    grid = np.sort(np.asarray(R_grid, dtype=float))
    if grid.size == 0:
        raise ValueError("radius grid is empty")
    draws = _draws(mu_or_bank)
    n = draws.shape[1]
    iu, ju = np.triu_indices(n, k=1)
    dist = np.concatenate([_pairwise_distances(d)[iu, ju, :].ravel() for d in draws])
    dist.sort()
    # density(R) = fraction of distances strictly below R
    dens = np.searchsorted(dist, grid, side="left") / dist.size
    gap = np.abs(dens - target_density)
    return float(grid[int(np.argmin(gap))])
