"""Multiple-imputation MCMC for the network and the scalar parameters.

One iteration picks an imputed path set uniformly from the bank, then
updates, in order: every edge (single-site Gibbs), ``sigma2`` (conjugate),
``alpha``, ``beta`` and ``c`` (random-walk Metropolis on transformed
scales) and finally ``(p1, phi)`` jointly (random-walk Metropolis on the
logit scale).
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, asdict
from typing import Callable

import numpy as np
from scipy import special

from . import _kernels
from .core import (DynamicNetwork, ModelParams, TrajectoryGrid, LOG_2PI, _check_ego,
                   _edges, _positions, step_log_density)
from .network import log_mass_from_counts, edge_counts, transition_probs

logger = logging.getLogger(__name__)

PARAM_NAMES = ("alpha", "beta", "p1", "phi", "c", "sigma2")


@dataclass
class Priors:
    """Prior hyperparameters.

    ``alpha ~ U(-1, 1)``, ``beta ~ N(0, beta_var)``, ``p1 ~ U(0, 1)``,
    ``phi ~ Beta(phi_a, phi_b)``, ``c ~ IG(c_shape, c_scale)`` and
    ``sigma2 ~ IG(sigma2_shape, sigma2_scale)``.
    """

    beta_var: float = 1e3
    phi_a: float = 17.2
    phi_b: float = 1.5
    c_shape: float = 1.5
    c_scale: float = 3.5
    sigma2_shape: float = 0.1
    sigma2_scale: float = 1e-3

    def log_prior(self, name: str, value: float) -> float:
        if name == "alpha":
            return 0.0 if -1.0 < value < 1.0 else -np.inf
        if name == "beta":
            return -0.5 * value * value / self.beta_var
        if name == "p1":
            return 0.0 if 0.0 < value < 1.0 else -np.inf
        if name == "phi":
            if not 0.0 < value < 1.0:
                return -np.inf
            return (self.phi_a - 1) * np.log(value) + (self.phi_b - 1) * np.log1p(-value)
        if name == "c":
            return _log_inv_gamma(value, self.c_shape, self.c_scale)
        if name == "sigma2":
            return _log_inv_gamma(value, self.sigma2_shape, self.sigma2_scale)
        raise KeyError(name)


# Applications with a slowly varying network use a stiffer stability prior.
APPLICATION_PRIORS = Priors(phi_a=100.0, phi_b=100.0 / 9.0)


def _log_inv_gamma(x, shape, scale):
    if not x > 0:
        return -np.inf
    return -(shape + 1.0) * np.log(x) - scale / x


@dataclass
class SamplerConfig:
    n_iter: int = 20000
    burn_in: int = 5000
    thin: int = 5
    seed: int = 0
    priors: Priors = field(default_factory=Priors)
    # random-walk scales on the transformed scales: logit((alpha+1)/2), beta, log c,
    # (logit p1, logit phi)
    scale_alpha: float = 0.3
    scale_beta: float = 0.05
    scale_c: float = 0.3
    scale_network: float = 0.3
    adapt_window: int = 50
    target_accept: float = 0.44
    target_accept_network: float = 0.35
    ego: str = "previous"
    random_scan: bool = False
    exact_beta: bool = False
    fixed: tuple = ()
    store_network: bool = False
    init: dict | None = None

    def __post_init__(self):
        if isinstance(self.priors, dict):
            self.priors = Priors(**self.priors)
        self.fixed = tuple(self.fixed)
        if not (self.n_iter > 0 and self.thin > 0 and self.burn_in >= 0):
            raise ValueError("n_iter and thin must be positive, burn_in nonnegative")
        if self.burn_in >= self.n_iter:
            raise ValueError("burn_in must be smaller than n_iter")
        for name in ("scale_alpha", "scale_beta", "scale_c", "scale_network"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        unknown = set(self.fixed) - set(PARAM_NAMES) - {"W"}
        if unknown:
            raise ValueError(f"unknown fixed parameters: {sorted(unknown)}")
        _check_ego(self.ego)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["fixed"] = list(self.fixed)
        return out


@dataclass
class PosteriorSamples:
    chains: dict
    iterations: np.ndarray
    w_mean: np.ndarray
    w_sd: np.ndarray
    n_network_samples: int
    acceptance: dict
    imputation_index: np.ndarray
    individual_ids: list
    times: np.ndarray
    w_samples: np.ndarray | None = None

    def __post_init__(self):
        lengths = {len(v) for v in self.chains.values()}
        if len(lengths) > 1 or (lengths and lengths.pop() != len(self.iterations)):
            raise ValueError("chain lengths are inconsistent")


class SamplerState:
    """Mutable state of one chain: current paths, network and parameters.

    Holds the time-major float arrays the compiled kernels work on, and a
    cache of the movement sufficient statistics for the current
    ``(paths, network, alpha, c)``.
    """

    def __init__(self, mu, W, params: ModelParams, ego: str = "previous"):
        _check_ego(ego)
        self.mu = np.ascontiguousarray(_positions(mu).transpose(1, 0, 2), dtype=float)
        self.W = np.ascontiguousarray(_edges(W).transpose(2, 0, 1), dtype=float)
        if self.mu.shape[:2] != self.W.shape[:2]:
            raise ValueError("positions and network have inconsistent shapes")
        self.params = params
        self.ego = ego
        self.refresh()

    @property
    def current(self) -> bool:
        return self.ego == "current"

    @property
    def n(self) -> int:
        return self.mu.shape[1]

    @property
    def T(self) -> int:
        return self.mu.shape[0]

    def set_paths(self, mu_time_major: np.ndarray):
        self.mu = mu_time_major
        self.refresh()

    def network(self) -> DynamicNetwork:
        return DynamicNetwork(self.W.transpose(1, 2, 0).astype(np.int8))

    def compute_stats(self, alpha: float, c: float):
        return _kernels.step_stats(self.mu, self.W, alpha, c, self.current)

    def refresh(self):
        self.stats = self.compute_stats(self.params.alpha, self.params.c)
        if np.isnan(self.stats[0]):
            raise FloatingPointError("movement precision is not positive definite")

    def movement_loglik(self, beta=None, sigma2=None, stats=None) -> float:
        beta = self.params.beta if beta is None else beta
        sigma2 = self.params.sigma2 if sigma2 is None else sigma2
        logdet, A, B, C = self.stats if stats is None else stats
        m = self.n * (self.T - 1)
        quad = C - 2.0 * beta * B + beta * beta * A
        return -m * LOG_2PI - m * np.log(sigma2) + logdet - 0.5 * quad / sigma2

    def network_counts(self):
        return edge_counts(self.W.transpose(1, 2, 0).astype(np.int64))


# ---------------------------------------------------------------------------
# edges

def edge_full_conditional(W, mu, params: ModelParams, i: int, j: int, t: int,
                          ego: str = "previous") -> float:
    """Probability that ``w_ij(t) = 1`` given everything else.

    Direct evaluation from the movement density of the affected steps and
    the edge-process terms; the sampler uses a compiled equivalent.
    """
    edges = np.array(_edges(W), dtype=np.int8, copy=True)
    pos = _positions(mu)
    T = edges.shape[2]
    if i == j:
        raise ValueError("no self edges")
    p10, p11 = transition_probs(params.p1, params.phi)
    trans = np.log(np.array([[1 - p10, p10], [1 - p11, p11]]))
    affected = [s for s in (t, t + 1) if 1 <= s < T]
    if ego == "current":
        affected = [s for s in affected if s == t]
    score = np.zeros(2)
    for state in (0, 1):
        edges[i, j, t] = edges[j, i, t] = state
        if t == 0:
            score[state] += np.log(params.p1 if state else 1 - params.p1)
        else:
            score[state] += trans[edges[i, j, t - 1], state]
        if t < T - 1:
            score[state] += trans[state, edges[i, j, t + 1]]
        for s in affected:
            score[state] += step_log_density(pos, edges, params, s, ego)
    return float(special.expit(score[1] - score[0]))


def _edge_order(n: int, T: int) -> np.ndarray:
    iu, ju = np.triu_indices(n, k=1)
    rows = [(t, i, j) for i, j in zip(iu, ju) for t in range(T)]
    return np.array(rows, dtype=np.int64).reshape(-1, 3)


def _log_transitions(p1, phi):
    p10, p11 = transition_probs(p1, phi)
    with np.errstate(divide="ignore"):
        lp_init = np.log(np.array([1 - p1, p1]))
        lp_trans = np.log(np.array([[1 - p10, p10], [1 - p11, p11]]))
    return lp_init, lp_trans


def update_edges(state: SamplerState, rng: np.random.Generator, order=None,
                 random_scan: bool = False) -> int:
    """One Gibbs sweep over all edges; returns the number of flipped edges."""
    if order is None:
        order = _edge_order(state.n, state.T)
    if random_scan:
        order = order[rng.permutation(len(order))]
    p = state.params
    lp_init, lp_trans = _log_transitions(p.p1, p.phi)
    flips = _kernels.sweep_edges(state.mu, state.W, rng.random(len(order)), order,
                                 p.alpha, p.beta, p.c, p.sigma2, lp_init, lp_trans,
                                 state.current)
    state.refresh()
    return flips


# ---------------------------------------------------------------------------
# scalars

def sigma2_conditional(state: SamplerState, priors: Priors) -> tuple[float, float]:
    """Shape and scale of the inverse-gamma full conditional of ``sigma2``."""
    _, A, B, C = state.stats
    beta = state.params.beta
    quad = C - 2.0 * beta * B + beta * beta * A
    return priors.sigma2_shape + state.n * (state.T - 1), priors.sigma2_scale + 0.5 * quad


def update_sigma2(state: SamplerState, rng: np.random.Generator, priors: Priors) -> float:
    shape, scale = sigma2_conditional(state, priors)
    sigma2 = scale / rng.gamma(shape)
    state.params = state.params.replace(sigma2=sigma2)
    return sigma2


def rw_metropolis(z: float | np.ndarray, log_target: Callable, scale,
                  rng: np.random.Generator, current_log_target: float | None = None):
    """One Gaussian random-walk Metropolis step on an unconstrained scale.

    Returns ``(z_new, log_target(z_new), accepted)``.
    """
    z = np.asarray(z, dtype=float)
    lt = log_target(z) if current_log_target is None else current_log_target
    proposal = z + scale * rng.standard_normal(z.shape)
    lt_prop = log_target(proposal)
    if np.log(rng.random()) < lt_prop - lt:
        return proposal, lt_prop, True
    return z, lt, False


_TRANSFORMS = {
    # name: (to unconstrained, from unconstrained, log |d value / d z|)
    "alpha": (lambda a: special.logit((a + 1.0) / 2.0),
              lambda z: 2.0 * special.expit(z) - 1.0,
              lambda z: np.log(2.0) + special.log_expit(z) + special.log_expit(-z)),
    "beta": (lambda b: b, lambda z: z, lambda z: 0.0),
    "c": (np.log, np.exp, lambda z: z),
}


def update_scalar_mh(name: str, state: SamplerState, rng: np.random.Generator,
                     scale: float, priors: Priors) -> bool:
    """Random-walk Metropolis update of ``alpha``, ``beta`` or ``c``."""
    to_z, from_z, log_jac = _TRANSFORMS[name]
    current = getattr(state.params, name)
    cache = {}

    def log_target(z):
        z = float(z)
        value = float(from_z(z))
        lp = priors.log_prior(name, value)
        if not np.isfinite(lp):
            return -np.inf
        if name == "beta":
            ll = state.movement_loglik(beta=value)
        elif name == "alpha":
            if not -1.0 < value < 1.0:
                return -np.inf
            stats = state.compute_stats(value, state.params.c)
            cache[z] = stats
            ll = state.movement_loglik(stats=stats)
        else:
            stats = state.compute_stats(state.params.alpha, value)
            cache[z] = stats
            ll = state.movement_loglik(stats=stats)
        if np.isnan(ll):
            return -np.inf
        return ll + lp + log_jac(z)

    z0 = float(to_z(current))
    current_lt = log_target(z0) if name == "beta" else (
        state.movement_loglik() + priors.log_prior(name, current) + log_jac(z0))
    z_new, _, accepted = rw_metropolis(z0, log_target, scale, rng, current_lt)
    if accepted:
        z_new = float(z_new)
        state.params = state.params.replace(**{name: float(from_z(z_new))})
        if name != "beta":
            state.stats = cache[z_new]
    return accepted


def beta_conditional(state: SamplerState, priors: Priors) -> tuple[float, float]:
    """Mean and variance of the Gaussian full conditional of ``beta``."""
    _, A, B, _ = state.stats
    s2 = state.params.sigma2
    precision = A / s2 + 1.0 / priors.beta_var
    return (B / s2) / precision, 1.0 / precision


def update_beta_exact(state: SamplerState, rng: np.random.Generator, priors: Priors) -> float:
    mean, var = beta_conditional(state, priors)
    beta = mean + np.sqrt(var) * rng.standard_normal()
    state.params = state.params.replace(beta=beta)
    return beta


def network_log_target(counts, p1: float, phi: float, priors: Priors) -> float:
    return (log_mass_from_counts(counts, p1, phi)
            + priors.log_prior("p1", p1) + priors.log_prior("phi", phi))


def update_network_params(state: SamplerState, rng: np.random.Generator, scale: float,
                          priors: Priors, counts=None) -> bool:
    """Joint random-walk Metropolis on ``(logit p1, logit phi)``.

    Only the edge process involves these two parameters, so the target is
    the network log mass (a function of the transition counts) plus priors.
    """
    if counts is None:
        counts = state.network_counts()

    def log_target(z):
        p1, phi = special.expit(z)
        if not (0.0 < p1 < 1.0 and 0.0 < phi < 1.0):
            return -np.inf
        jac = np.sum(special.log_expit(z) + special.log_expit(-z))
        return network_log_target(counts, p1, phi, priors) + jac

    z0 = special.logit([state.params.p1, state.params.phi])
    z_new, _, accepted = rw_metropolis(z0, log_target, scale, rng)
    if accepted:
        p1, phi = special.expit(z_new)
        state.params = state.params.replace(p1=float(p1), phi=float(phi))
    return accepted


# ---------------------------------------------------------------------------
# driver

def _as_bank_array(bank) -> tuple[np.ndarray, list, np.ndarray]:
    """Time-major ``(K, T, n, 2)`` draws, ids and grid times."""
    from .imputation import ImputationBank

    if isinstance(bank, TrajectoryGrid):
        draws = bank.positions[None]
        ids, times = bank.individual_ids, bank.times
    elif isinstance(bank, ImputationBank):
        draws = bank.draws
        ids, times = bank.individual_ids, bank.times
    else:
        draws = np.asarray(bank, dtype=float)
        if draws.ndim == 3:
            draws = draws[None]
        ids = [str(i + 1) for i in range(draws.shape[1])]
        times = np.arange(draws.shape[2], dtype=float)
    if draws.shape[0] < 1:
        raise ValueError("imputation bank is empty")
    return np.ascontiguousarray(draws.transpose(0, 2, 1, 3), dtype=float), list(ids), times


def default_init(draws: np.ndarray) -> dict:
    steps = np.diff(draws[0], axis=0)
    return dict(alpha=0.5, beta=0.0, p1=0.5, phi=0.5, c=1.0,
                sigma2=float(max(np.mean(steps ** 2), 1e-8)))


def run_mcmc(bank, config: SamplerConfig, init_network=None,
             progress: Callable | None = None) -> PosteriorSamples:
    """Run the multiple-imputation sampler.

    ``bank`` may be an :class:`~movenet.imputation.ImputationBank`, a single
    :class:`TrajectoryGrid` (noiseless mode) or an array of draws shaped
    ``(K, n, T, 2)``.
    """
    draws, ids, times = _as_bank_array(bank)
    K, T, n, _ = draws.shape
    rng = np.random.default_rng(config.seed)
    priors = config.priors

    init = default_init(draws)
    if config.init:
        init.update(config.init)
    params = ModelParams(**init)
    if init_network is None:
        W0 = np.zeros((n, n, T), dtype=np.int8)
    else:
        W0 = _edges(init_network)
    state = SamplerState(draws[0].transpose(1, 0, 2), W0, params, config.ego)

    order = _edge_order(n, T)
    scales = dict(alpha=config.scale_alpha, beta=config.scale_beta, c=config.scale_c,
                  network=config.scale_network)
    blocks = [b for b in ("alpha", "beta", "c") if b not in config.fixed]
    if config.exact_beta and "beta" in blocks:
        blocks.remove("beta")
    update_net = not ({"p1", "phi"} & set(config.fixed))
    mh_blocks = blocks + (["network"] if update_net else [])
    window_acc = {b: 0 for b in mh_blocks}
    total_acc = {b: 0 for b in mh_blocks}
    n_adapt = 0

    n_keep = len(range(config.burn_in, config.n_iter, config.thin))
    chains = {name: np.empty(n_keep) for name in PARAM_NAMES}
    kept_iters = np.empty(n_keep, dtype=np.int64)
    w_sum = np.zeros((T, n, n))
    w_samples = np.empty((n_keep, n, n, T), dtype=np.int8) if config.store_network else None
    imputation_index = np.empty(config.n_iter, dtype=np.int64)
    keep = 0

    for it in range(config.n_iter):
        k = int(rng.integers(K))
        imputation_index[it] = k
        try:
            state.set_paths(draws[k])
            if "W" not in config.fixed:
                update_edges(state, rng, order, config.random_scan)
            if "sigma2" not in config.fixed:
                update_sigma2(state, rng, priors)
            for name in ("alpha", "beta", "c"):
                if name in blocks:
                    acc = update_scalar_mh(name, state, rng, scales[name], priors)
                    window_acc[name] += acc
                    if it >= config.burn_in:
                        total_acc[name] += acc
                elif name == "beta" and config.exact_beta and "beta" not in config.fixed:
                    update_beta_exact(state, rng, priors)
            if update_net:
                acc = update_network_params(state, rng, scales["network"], priors)
                window_acc["network"] += acc
                if it >= config.burn_in:
                    total_acc["network"] += acc
        except (FloatingPointError, np.linalg.LinAlgError) as exc:
            raise RuntimeError(f"numerical failure at iteration {it} "
                               f"(imputation {k}, params {state.params})") from exc

        if it < config.burn_in and (it + 1) % config.adapt_window == 0:
            n_adapt += 1
            step = min(0.5, 1.0 / np.sqrt(n_adapt))
            for b in mh_blocks:
                rate = window_acc[b] / config.adapt_window
                target = config.target_accept_network if b == "network" else config.target_accept
                scales[b] *= np.exp(step if rate > target else -step)
                window_acc[b] = 0

        if it >= config.burn_in and (it - config.burn_in) % config.thin == 0:
            for name in PARAM_NAMES:
                chains[name][keep] = getattr(state.params, name)
            kept_iters[keep] = it
            w_sum += state.W
            if w_samples is not None:
                w_samples[keep] = state.W.transpose(1, 2, 0)
            keep += 1
        if progress is not None:
            progress(it, state)

    n_post = config.n_iter - config.burn_in
    acceptance = {b: total_acc[b] / n_post for b in mh_blocks}
    acceptance["final_scales"] = {b: float(scales[b]) for b in mh_blocks}
    w_mean = (w_sum / keep).transpose(1, 2, 0)
    w_sd = np.sqrt(np.clip(w_mean * (1.0 - w_mean), 0.0, None))
    logger.info("sampler finished: acceptance %s", acceptance)
    return PosteriorSamples(chains=chains, iterations=kept_iters, w_mean=w_mean, w_sd=w_sd,
                            n_network_samples=keep, acceptance=acceptance,
                            imputation_index=imputation_index, individual_ids=ids,
                            times=np.asarray(times, dtype=float), w_samples=w_samples)


def effective_sample_size(chain) -> float:
    """Effective sample size by Geyer's initial positive sequence.

    A constant chain has no information about its variance; it gets 0 with
    a warning.
    """
    import warnings

    x = np.asarray(chain, dtype=float)
    N = x.size
    if N < 10:
        raise ValueError("need at least 10 draws")
    x = x - x.mean()
    if np.allclose(x, 0.0):
        warnings.warn("constant chain: effective sample size set to 0", RuntimeWarning)
        return 0.0
    m = 1 << int(np.ceil(np.log2(2 * N)))
    f = np.fft.rfft(x, m)
    acov = np.fft.irfft(f * np.conj(f), m)[:N] / N
    rho = acov / acov[0]
    tau = -1.0
    for k in range(0, N - 1, 2):
        pair = rho[k] + rho[k + 1]
        if pair <= 0:
            break
        tau += 2.0 * pair
    return float(N / tau)
