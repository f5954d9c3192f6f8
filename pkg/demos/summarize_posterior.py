"""
Summarising a posterior network
===============================

Edge series for one pair and per-time graph statistics of the
thresholded posterior-mean network.
"""

import numpy as np

from movenet import SamplerConfig, edge_posterior_series, network_statistics, run_mcmc
from movenet.scenarios import simulation_study

grid, W = simulation_study(seed=5, n=4, T=40)
samples = run_mcmc(grid, SamplerConfig(n_iter=3000, burn_in=1000, thin=5, seed=5))

mean, sd = edge_posterior_series(samples, "1", "2")
print("edge 1-2, true :", "".join(str(int(v)) for v in W.edges[0, 1]))
print("edge 1-2, P>0.5:", "".join(str(int(v > 0.5)) for v in mean))

stats = network_statistics(samples.w_mean, threshold=0.5)
print("density by time (first 10):", np.round(stats.density[:10], 2))
print("mean degree per individual:", np.round(stats.degree.mean(axis=1), 2))
print("mean transitivity %.3f" % stats.transitivity.mean())
