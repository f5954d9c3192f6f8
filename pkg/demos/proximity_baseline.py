"""
The proximity baseline
======================

Call two individuals connected whenever they are closer than R. Pick R
so the proximity network has the same density as the true one and see
how far that gets.
"""

import numpy as np

from movenet import density_matched_radius, proximity_network
from movenet.baseline import mean_density
from movenet.scenarios import STUDY_TRUTH, simulation_study

grid, W = simulation_study(seed=4)

for R in (5.0, 10.0, 15.0):
    prox = proximity_network(grid, R)
    print("R = %4.1f km: density %.3f, MAE %.3f"
          % (R, mean_density(prox.edges), np.abs(prox.edges - W.edges).mean()))

R = density_matched_radius(grid, STUDY_TRUTH.p1, np.arange(0.1, 30, 0.1))
prox = proximity_network(grid, R)
print("density-matched R = %.1f km: MAE %.3f" % (R, np.abs(prox.edges - W.edges).mean()))
