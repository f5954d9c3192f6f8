"""
Simulating a group that moves together
======================================

Draw a dynamic network from the edge process, then let six individuals
move on it with alignment and attraction switched on.
"""

import numpy as np

from movenet import ModelParams, simulate_paths
from movenet.network import edge_counts

truth = ModelParams(alpha=0.9, beta=0.5, p1=0.2, phi=0.95, c=0.33, sigma2=1.0)
rng = np.random.default_rng(1)
grid, W = simulate_paths(truth, n=6, T=100, mu1=5 * rng.standard_normal((6, 2)), rng=rng)

# The edge process keeps the density near p1 at every time.
iu, ju = np.triu_indices(6, 1)
density = W.edges[iu, ju].mean(axis=0)
print("mean density %.3f (p1 = %.2f)" % (density.mean(), truth.p1))

# phi close to 1 means edges rarely switch.
counts = edge_counts(W)
print("0->1 switches: %d, 1->0 switches: %d" % (counts.n01, counts.n10))

# Linked pairs end up closer together than unlinked ones.
gap = np.linalg.norm(grid.positions[iu] - grid.positions[ju], axis=-1)
linked = W.edges[iu, ju].astype(bool)
print("mean distance linked %.2f km, unlinked %.2f km" % (gap[linked].mean(), gap[~linked].mean()))
