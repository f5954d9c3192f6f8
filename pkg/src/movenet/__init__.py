"""Dynamic social networks inferred from animal movement.

Movement of ``n`` individuals on a regular time grid is a Gaussian Markov
random field whose precision and attraction terms are set by a latent,
binary, time-varying network. The network is a set of independent
two-state Markov chains, one per pair. Telemetry fixes are turned into
grid paths by a correlated random walk imputation, and the network and
parameters are sampled by multiple-imputation MCMC.
"""
__version__ = "0.1.0"

from .core import (DynamicNetwork, ModelParams, TrajectoryGrid, attraction_direction,
                   build_precision, conditional_mean, ego_mean, ego_size, joint_step_mean,
                   movement_log_density, simulate_paths, simulate_step)
from .network import (EdgeCounts, EdgeTransition, edge_counts, network_log_mass,
                      simulate_network, transition_probs)
from .imputation import (CtcrwModel, ImputationBank, ObservationSet, Track, build_bank,
                         common_grid, draw_path, fit_ctcrw, kalman_smoother)
from .inference import (PosteriorSamples, Priors, SamplerConfig, edge_full_conditional,
                        effective_sample_size, run_mcmc)
from .baseline import (ProximityNetwork, averaged_proximity, density_matched_radius,
                       proximity_network)
from .summaries import (IntervalSummary, credible_intervals, edge_posterior_series,
                        network_statistics)
