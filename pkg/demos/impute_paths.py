"""
Imputing regular paths from irregular fixes
===========================================

Telemetry arrives at irregular times with position error. Fit a
continuous-time correlated random walk to each individual and draw
path sets on a shared hourly grid.
"""

import numpy as np

from movenet.imputation import build_bank, common_grid, fit_all
from movenet.scenarios import observe, simulation_study

grid, _ = simulation_study(seed=2, n=3, T=60)
obs = observe(grid, n_obs=80, error_sd=0.5, rng=np.random.default_rng(0))

models = fit_all(obs)
for key, m in models.items():
    print("id %s: theta %.3f /h, sigma_v2 %.3f km^2/h^3" % (key, m.theta, m.sigma_v2))

times = common_grid(obs, spacing=1.0)
bank = build_bank(models, obs, times, K=20, rng=np.random.default_rng(3))
print("bank holds", bank.draws.shape, "(K, n, T, xy)")

# Spread across draws is the imputation uncertainty, of the same order as
# the 0.5 km fix error here.
spread = bank.draws.std(axis=0).mean()
err = np.sqrt(((bank.draws.mean(axis=0) - grid.positions) ** 2).mean())
print("mean draw SD %.3f km, RMSE of the bank mean %.3f km" % (spread, err))
