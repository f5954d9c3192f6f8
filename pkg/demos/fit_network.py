"""
Fitting the joint movement and network model
============================================

Run the multiple-imputation sampler on exactly known paths (the
noiseless mode) and compare the posterior with the truth.
"""

import numpy as np

from movenet import SamplerConfig, credible_intervals, run_mcmc
from movenet.scenarios import STUDY_TRUTH, simulation_study

grid, W = simulation_study(seed=3, n=5, T=60)

# A short run; the defaults (20 000 iterations) are meant for real fits.
samples = run_mcmc(grid, SamplerConfig(n_iter=4000, burn_in=1000, thin=5, seed=3))
for s in credible_intervals(samples):
    truth = getattr(STUDY_TRUTH, s.name)
    print("%-6s truth %5.2f  median %6.3f  95%% [%6.3f, %6.3f]"
          % (s.name, truth, s.median, s.lower, s.upper))

mae = np.abs(samples.w_mean - W.edges).mean()
print("posterior-mean network MAE %.3f" % mae)
print("acceptance", {k: round(v, 2) for k, v in samples.acceptance.items() if k != "final_scales"})
