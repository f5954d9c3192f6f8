"""Posterior summaries: credible intervals, edge series and graph statistics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class IntervalSummary:
    name: str
    median: float
    lower: float
    upper: float

    def __post_init__(self):
        if not self.lower <= self.median <= self.upper:
            raise ValueError(f"interval for {self.name} is not ordered")

    def covers(self, value: float) -> bool:
        return self.lower <= value <= self.upper


def credible_intervals(samples, level: float = 0.95, names=None) -> list[IntervalSummary]:
    """Equal-tailed intervals and medians from the scalar chains.

    ``samples`` is a :class:`~movenet.inference.PosteriorSamples` or a
    mapping of name to chain.
    """
    chains = getattr(samples, "chains", samples)
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    tail = (1.0 - level) / 2.0
    out = []
    for name in names or list(chains):
        chain = np.asarray(chains[name], dtype=float)
        if chain.size == 0:
            raise ValueError(f"chain {name!r} is empty")
        lo, med, hi = np.quantile(chain, [tail, 0.5, 1.0 - tail])
        out.append(IntervalSummary(name, float(med), float(lo), float(hi)))
    return out


def _pair_index(samples, i, j):
    ids = list(samples.individual_ids)
    idx = []
    for key in (i, j):
        if isinstance(key, str):
            if key not in ids:
                raise IndexError(f"unknown individual {key!r}")
            idx.append(ids.index(key))
        else:
            if not 0 <= key < len(ids):
                raise IndexError(f"individual index {key} out of range")
            idx.append(int(key))
    if idx[0] == idx[1]:
        raise IndexError("a pair needs two distinct individuals")
    return idx


def edge_posterior_series(samples, i, j) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and SD of ``w_ij(t)`` for every ``t``.

    ``i`` and ``j`` are indices or individual ids.
    """
    a, b = _pair_index(samples, i, j)
    return samples.w_mean[a, b].copy(), samples.w_sd[a, b].copy()


@dataclass
class NetworkStatistics:
    density: np.ndarray       # (T,)
    degree: np.ndarray        # (n, T)
    transitivity: np.ndarray  # (T,)


def _graph_stats(adj: np.ndarray):
    """Statistics of binary graphs ``adj[..., n, n]`` stacked on leading axes."""
    adj = adj.astype(float)
    n = adj.shape[-1]
    degree = adj.sum(axis=-1)
    density = degree.sum(axis=-1) / (n * (n - 1))
    closed = np.einsum("...ij,...jk,...ki->...", adj, adj, adj)  # 6 x triangles
    triples = np.sum(degree * (degree - 1), axis=-1)              # 2 x connected triples
    with np.errstate(invalid="ignore", divide="ignore"):
        trans = np.where(triples > 0, closed / np.where(triples > 0, triples, 1), 0.0)
    return density, degree, trans


def network_statistics(w, threshold: float = 0.5) -> NetworkStatistics:
    """Density, degrees and transitivity per time of ``w > threshold``.

    ``w`` is an ``(n, n, T)`` array of posterior edge means (or any binary
    network). A graph without connected triples has transitivity 0.
    """
    if not 0 < threshold < 1:
        raise ValueError("threshold must lie in (0, 1)")
    w = np.asarray(getattr(w, "edges", w), dtype=float)
    adj = (w > threshold).transpose(2, 0, 1)
    density, degree, trans = _graph_stats(adj)
    return NetworkStatistics(density=density, degree=degree.T, transitivity=trans)


def network_statistics_posterior(w_samples) -> dict:
    """Posterior mean and SD of the per-time statistics over stored networks.

    ``w_samples`` is ``(S, n, n, T)`` binary.
    """
    adj = np.asarray(w_samples).transpose(0, 3, 1, 2)
    density, degree, trans = _graph_stats(adj)
    return {
        "density": (density.mean(axis=0), density.std(axis=0)),
        "degree": (degree.mean(axis=0).T, degree.std(axis=0).T),
        "transitivity": (trans.mean(axis=0), trans.std(axis=0)),
    }
