"""Synthetic data sets with known truth."""
from __future__ import annotations

import numpy as np

from .core import DynamicNetwork, ModelParams, TrajectoryGrid, simulate_paths
from .imputation import ObservationSet, Track

# Values used for the desk-scale simulation study.
STUDY_TRUTH = ModelParams(alpha=0.9, beta=0.5, p1=0.2, phi=0.95, c=0.33, sigma2=1.0)


def observe(grid: TrajectoryGrid, n_obs: int, error_sd: float,
            rng: np.random.Generator) -> ObservationSet:
    """Noisy fixes at random times, positions linearly interpolated on the grid.

    Each individual gets fixes at both grid ends plus ``n_obs - 2`` uniform
    times in between, so every track spans the whole grid.
    """
    if n_obs < 2:
        raise ValueError("n_obs must be at least 2")
    times = grid.times
    tracks = {}
    for i, key in enumerate(grid.individual_ids):
        inner = np.sort(rng.uniform(times[0], times[-1], n_obs - 2))
        t = np.unique(np.concatenate([[times[0]], inner, [times[-1]]]))
        xy = np.column_stack([np.interp(t, times, grid.positions[i, :, k]) for k in range(2)])
        xy += error_sd * rng.standard_normal(xy.shape)
        tracks[key] = Track(times=t, xy=xy, error_sd=np.full(len(t), float(error_sd)))
    return ObservationSet(tracks=tracks)


def simulation_study(seed: int, n: int = 6, T: int = 100, params: ModelParams = STUDY_TRUTH,
                     init_spread: float = 5.0, ego: str = "previous"):
    """Paths and network drawn from the model; starts are iid N(0, init_spread^2)."""
    rng = np.random.default_rng(seed)
    mu1 = init_spread * rng.standard_normal((n, 2))
    return simulate_paths(params, n, T, mu1, rng, ego=ego)


THREE_TYPE_GROUPS = {"B1": ["1"], "B2": ["2", "3", "4"], "A": ["5", "6", "7"]}


def three_type_network(T: int) -> DynamicNetwork:
    """Within-type ties only: B2 is a persistent triangle, A has 5-6 early on."""
    edges = np.zeros((7, 7, T), dtype=np.int8)
    for a, b in [(1, 2), (1, 3), (2, 3)]:
        edges[a, b, :] = edges[b, a, :] = 1
    edges[4, 5, : T // 3] = edges[5, 4, : T // 3] = 1
    return DynamicNetwork(edges)


def three_type_scenario(seed: int, T: int = 100, n_obs: int = 200, error_sd: float = 0.2,
                        params: ModelParams | None = None):
    """Seven individuals in three types that start within a few km of each other.

    Every inter-type pair is closer than 10 km at the first time, so any
    proximity network with R = 10 links individuals of different types
    there, while the true network has no inter-type ties at all.

    Returns ``(grid, network, observations, groups)``.
    """
    params = params or ModelParams(alpha=0.9, beta=0.5, p1=0.1, phi=0.95, c=0.33, sigma2=1.0)
    rng = np.random.default_rng(seed)
    centres = np.array([[-2.5, 0.0], [0.0, 1.5], [0.0, 1.5], [0.0, 1.5],
                        [2.5, 0.0], [2.5, 0.0], [2.0, -2.0]])
    mu1 = centres + 0.3 * rng.standard_normal((7, 2))
    W = three_type_network(T)
    ids = [str(k) for k in range(1, 8)]
    grid, W = simulate_paths(params, 7, T, mu1, rng, W=W, individual_ids=ids)
    obs = observe(grid, n_obs, error_sd, rng)
    return grid, W, obs, THREE_TYPE_GROUPS


def inter_type_pairs(ids, groups) -> list[tuple[int, int]]:
    label = {key: g for g, members in groups.items() for key in members}
    return [(a, b) for a in range(len(ids)) for b in range(a + 1, len(ids))
            if label[ids[a]] != label[ids[b]]]
