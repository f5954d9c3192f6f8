"""Independent reference computations used by the tests.

Everything here works on dense covariance matrices or brute-force
enumeration, never on the recursive/compiled paths under test.
"""
import itertools

import numpy as np
from scipy import stats

from movenet.core import build_precision, joint_step_mean, movement_log_density
from movenet.imputation import transition
from movenet.network import network_log_mass


def random_slice(n, rng, p=0.5):
    w = np.triu((rng.random((n, n)) < p).astype(np.int8), 1)
    return w + w.T


def random_network(n, T, rng, p=0.5):
    return np.stack([random_slice(n, rng, p) for _ in range(T)], axis=2)


def conditional_from_joint(mean, Q, x, i):
    """Mean and precision of block ``i`` (2 coordinates) given the rest.

    Goes through the covariance ``Q^-1`` rather than the precision.
    """
    cov = np.linalg.inv(Q)
    idx = [2 * i, 2 * i + 1]
    rest = [k for k in range(len(mean)) if k not in idx]
    s12 = cov[np.ix_(idx, rest)]
    s22 = cov[np.ix_(rest, rest)]
    cmean = mean[idx] + s12 @ np.linalg.solve(s22, x[rest] - mean[rest])
    ccov = cov[np.ix_(idx, idx)] - s12 @ np.linalg.solve(s22, s12.T)
    return cmean, np.linalg.inv(ccov)


def dense_movement_log_density(pos, edges, params, ego="previous"):
    """Sum of scipy multivariate normal log pdfs with explicit covariances."""
    total = 0.0
    for t in range(1, pos.shape[1]):
        attract = edges[:, :, t - 1] if ego == "previous" else edges[:, :, t]
        mean = joint_step_mean(pos[:, t - 1], attract, params).ravel()
        cov = np.linalg.inv(build_precision(edges[:, :, t], params))
        total += stats.multivariate_normal(mean, cov).logpdf(pos[:, t].ravel())
    return total


def brute_force_edge_posterior(pos, params, ego="previous"):
    """Posterior over all 2^T edge sequences of a two-individual network."""
    T = pos.shape[1]
    seqs = list(itertools.product([0, 1], repeat=T))
    logp = []
    for seq in seqs:
        edges = np.zeros((2, 2, T), dtype=np.int8)
        edges[0, 1] = edges[1, 0] = seq
        logp.append(movement_log_density(pos, edges, params, ego)
                    + network_log_mass(edges, params.p1, params.phi))
    logp = np.array(logp)
    p = np.exp(logp - logp.max())
    return seqs, p / p.sum()


def dense_ctcrw_posterior(model, track, grid):
    """Joint-Gaussian conditioning of the CTCRW states on all fixes.

    Returns merged times, posterior means ``(m, 2, 2)`` ([time, state, axis]),
    the shared per-axis covariance blocks ``(m, 2, 2)`` and the marginal
    log likelihood of the fixes.
    """
    times = np.union1d(track.times, grid)
    m = len(times)
    d = 2 * m
    # z = G u with u = (s_0, e_1, ..., e_{m-1})
    Fs = [np.eye(2)]
    Qs = [np.diag([model.init_pos_var, model.sigma_v2 / (2 * model.theta)])]
    for k in range(1, m):
        F, Qd = transition(model.theta, model.sigma_v2, times[k] - times[k - 1])
        Fs.append(F)
        Qs.append(Qd)
    G = np.zeros((d, d))
    for k in range(m):
        for j in range(k + 1):
            phi = np.eye(2)
            for l in range(j + 1, k + 1):
                phi = Fs[l] @ phi
            G[2 * k:2 * k + 2, 2 * j:2 * j + 2] = phi
    Su = np.zeros((d, d))
    for k in range(m):
        Su[2 * k:2 * k + 2, 2 * k:2 * k + 2] = Qs[k]
    Sz = G @ Su @ G.T
    obs_idx = np.searchsorted(times, track.times)
    H = np.zeros((len(obs_idx), d))
    H[np.arange(len(obs_idx)), 2 * obs_idx] = 1.0
    R = np.diag(track.error_sd ** 2)
    S = H @ Sz @ H.T + R
    gain = Sz @ H.T @ np.linalg.inv(S)
    cov = Sz - gain @ H @ Sz
    means = np.empty((m, 2, 2))
    loglik = 0.0
    for axis in range(2):
        mu_u = np.zeros(d)
        mu_u[0] = track.xy[0, axis]
        mu_z = G @ mu_u
        y = track.xy[:, axis]
        post = mu_z + gain @ (y - H @ mu_z)
        means[:, :, axis] = post.reshape(m, 2)
        loglik += stats.multivariate_normal(H @ mu_z, S).logpdf(y)
    blocks = np.array([cov[2 * k:2 * k + 2, 2 * k:2 * k + 2] for k in range(m)])
    return times, means, blocks, loglik


def grid_cdf(log_density, grid):
    """Normalised CDF of an unnormalised log density tabulated on ``grid``."""
    lp = np.array([log_density(x) for x in grid])
    p = np.exp(lp - lp.max())
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (p[1:] + p[:-1]) * np.diff(grid))])
    return cdf / cdf[-1]


def ks_against_grid(draws, grid, cdf):
    draws = np.sort(np.asarray(draws))
    model = np.interp(draws, grid, cdf)
    n = draws.size
    ecdf_hi = np.arange(1, n + 1) / n
    ecdf_lo = np.arange(0, n) / n
    return float(max(np.max(ecdf_hi - model), np.max(model - ecdf_lo)))
