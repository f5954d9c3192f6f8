"""Latent edge process: independent two-state Markov chains per pair.

The chain for each pair starts from Bernoulli(p1) and moves with
``P(1 | 0) = (1 - phi) p1`` and ``P(1 | 1) = 1 - (1 - phi)(1 - p1)``, which
keeps the marginal edge probability at ``p1`` for every time.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DynamicNetwork, _edges


@dataclass(frozen=True)
class EdgeTransition:
    p1: float
    phi: float

    def __post_init__(self):
        _check_domain(self.p1, self.phi)

    @property
    def p_1_given_0(self) -> float:
        return transition_probs(self.p1, self.phi)[0]

    @property
    def p_1_given_1(self) -> float:
        return transition_probs(self.p1, self.phi)[1]

    def stationary(self) -> float:
        p10, p11 = transition_probs(self.p1, self.phi)
        return p10 / (p10 + 1.0 - p11)


@dataclass(frozen=True)
class EdgeCounts:
    """Sufficient statistics of a network under the edge process."""

    n00: int
    n01: int
    n10: int
    n11: int
    n0_init: int
    n1_init: int


def _check_domain(p1, phi):
    if not 0.0 < p1 < 1.0:
        raise ValueError(f"p1 must lie in (0, 1), got {p1}")
    if not 0.0 <= phi < 1.0:
        raise ValueError(f"phi must lie in [0, 1), got {phi}")


def transition_probs(p1: float, phi: float) -> tuple[float, float]:
    """Return ``(P(w_t = 1 | w_{t-1} = 0), P(w_t = 1 | w_{t-1} = 1))``."""
    _check_domain(p1, phi)
    return (1.0 - phi) * p1, 1.0 - (1.0 - phi) * (1.0 - p1)


def simulate_pair_chains(p1: float, phi: float, n_pairs: int, T: int,
                         rng: np.random.Generator) -> np.ndarray:
    """Simulate ``n_pairs`` independent edge chains, shape ``(n_pairs, T)``."""
    p10, p11 = transition_probs(p1, phi)
    u = rng.random((n_pairs, T))
    chains = np.empty((n_pairs, T), dtype=np.int8)
    chains[:, 0] = u[:, 0] < p1
    for t in range(1, T):
        p = np.where(chains[:, t - 1] == 1, p11, p10)
        chains[:, t] = u[:, t] < p
    return chains


def simulate_network(p1: float, phi: float, n: int, T: int,
                     rng: np.random.Generator) -> DynamicNetwork:
    if n < 2 or T < 1:
        raise ValueError("need n >= 2 and T >= 1")
    iu, ju = np.triu_indices(n, k=1)
    chains = simulate_pair_chains(p1, phi, len(iu), T, rng)
    edges = np.zeros((n, n, T), dtype=np.int8)
    edges[iu, ju, :] = chains
    edges[ju, iu, :] = chains
    return DynamicNetwork(edges)


def edge_counts(W) -> EdgeCounts:
    edges = _edges(W)
    n = edges.shape[0]
    iu, ju = np.triu_indices(n, k=1)
    chains = edges[iu, ju, :].astype(np.int64)
    prev, nxt = chains[:, :-1], chains[:, 1:]
    n11 = int(np.sum(prev & nxt))
    n10 = int(np.sum(prev & (1 - nxt)))
    n01 = int(np.sum((1 - prev) & nxt))
    n00 = prev.size - n11 - n10 - n01
    n1 = int(chains[:, 0].sum())
    return EdgeCounts(n00=n00, n01=n01, n10=n10, n11=n11,
                      n0_init=len(iu) - n1, n1_init=n1)


def _xlogy(count, p):
    # 0 * log(0) contributes nothing; a positive count at probability 0 gives -inf.
    if count == 0:
        return 0.0
    if p <= 0.0:
        return -np.inf
    return count * np.log(p)


def log_mass_from_counts(counts: EdgeCounts, p1: float, phi: float) -> float:
    p10, p11 = transition_probs(p1, phi)
    return (_xlogy(counts.n1_init, p1) + _xlogy(counts.n0_init, 1.0 - p1)
            + _xlogy(counts.n01, p10) + _xlogy(counts.n00, 1.0 - p10)
            + _xlogy(counts.n11, p11) + _xlogy(counts.n10, 1.0 - p11))


def network_log_mass(W, p1: float, phi: float) -> float:
    """Log probability of a whole dynamic network under the edge process."""
    return log_mass_from_counts(edge_counts(W), p1, phi)
