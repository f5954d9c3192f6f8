"""Compiled inner loops for the sampler.

Arrays here use a time-major layout: positions ``(T, n, 2)`` and networks
``(T, n, n)`` as float64. ``current`` selects the ego-network convention
(False: ``W(t-1)`` drives attraction into ``t``; True: ``W(t)`` does).
"""
import numpy as np
from numba import njit


@njit(cache=True)
def unit_vectors(pos, w, out):
    n = pos.shape[0]
    for i in range(n):
        deg = 0.0
        cx = 0.0
        cy = 0.0
        for j in range(n):
            if w[i, j] != 0.0:
                deg += w[i, j]
                cx += w[i, j] * pos[j, 0]
                cy += w[i, j] * pos[j, 1]
        out[i, 0] = 0.0
        out[i, 1] = 0.0
        if deg > 0.0:
            gx = cx / deg - pos[i, 0]
            gy = cy / deg - pos[i, 1]
            norm = np.sqrt(gx * gx + gy * gy)
            if norm > 0.0:
                out[i, 0] = gx / norm
                out[i, 1] = gy / norm


@njit(cache=True)
def fill_q0(w, alpha, c, q0):
    n = w.shape[0]
    for i in range(n):
        deg = 0.0
        for j in range(n):
            deg += w[i, j]
            q0[i, j] = -alpha * w[i, j]
        q0[i, i] = deg if deg > 0.0 else c


@njit(cache=True)
def chol_logdet(q0, L):
    """Cholesky into ``L``; returns log det or NaN if not positive definite."""
    n = q0.shape[0]
    logdet = 0.0
    for j in range(n):
        s = q0[j, j]
        for k in range(j):
            s -= L[j, k] * L[j, k]
        if s <= 0.0:
            return np.nan
        d = np.sqrt(s)
        L[j, j] = d
        logdet += 2.0 * np.log(d)
        for i in range(j + 1, n):
            s = q0[i, j]
            for k in range(j):
                s -= L[i, k] * L[j, k]
            L[i, j] = s / d
    return logdet


@njit(cache=True)
def quad_form(q0, a, b):
    """Sum over the two coordinate columns of ``a_k^T Q0 b_k``."""
    n = q0.shape[0]
    s = 0.0
    for i in range(n):
        for j in range(n):
            q = q0[i, j]
            if q != 0.0:
                s += q * (a[i, 0] * b[j, 0] + a[i, 1] * b[j, 1])
    return s


@njit(cache=True)
def step_stats(mu, W, alpha, c, current):
    """Sufficient statistics of the movement density in ``(beta, sigma2)``.

    Returns ``(logdet, A, B, C)`` where, summed over steps, ``logdet`` is the
    log determinant of Q0 and the quadratic form is ``C - 2 beta B + beta^2 A``.
    """
    T, n, _ = mu.shape
    q0 = np.empty((n, n))
    L = np.zeros((n, n))
    u = np.empty((n, 2))
    d = np.empty((n, 2))
    logdet = 0.0
    A = 0.0
    B = 0.0
    C = 0.0
    for t in range(1, T):
        if current:
            unit_vectors(mu[t - 1], W[t], u)
        else:
            unit_vectors(mu[t - 1], W[t - 1], u)
        for i in range(n):
            d[i, 0] = mu[t, i, 0] - mu[t - 1, i, 0]
            d[i, 1] = mu[t, i, 1] - mu[t - 1, i, 1]
        fill_q0(W[t], alpha, c, q0)
        ld = chol_logdet(q0, L)
        if np.isnan(ld):
            return np.nan, np.nan, np.nan, np.nan
        logdet += ld
        A += quad_form(q0, u, u)
        B += quad_form(q0, d, u)
        C += quad_form(q0, d, d)
    return logdet, A, B, C


@njit(cache=True)
def _slice_residual(mu, W, t, beta, current, u, d):
    if current:
        unit_vectors(mu[t - 1], W[t], u)
    else:
        unit_vectors(mu[t - 1], W[t - 1], u)
    n = mu.shape[1]
    for k in range(n):
        d[k, 0] = mu[t, k, 0] - mu[t - 1, k, 0] - beta * u[k, 0]
        d[k, 1] = mu[t, k, 1] - mu[t - 1, k, 1] - beta * u[k, 1]


@njit(cache=True)
def edge_log_odds(mu, W, t, i, j, alpha, beta, c, sigma2, lp_init, lp_trans, current,
                  q0, L, u, d):
    """Log odds of ``w_ij(t) = 1`` against ``0`` given everything else.

    ``lp_init`` is ``[log(1-p1), log p1]`` and ``lp_trans[a, b]`` the log
    probability of moving from state ``a`` to ``b``. Leaves ``W`` unchanged.
    """
    T = mu.shape[0]
    old = W[t, i, j]
    score = np.zeros(2)
    for s in range(2):
        W[t, i, j] = s
        W[t, j, i] = s
        if t == 0:
            score[s] += lp_init[s]
        else:
            score[s] += lp_trans[int(W[t - 1, i, j]), s]
        if t < T - 1:
            score[s] += lp_trans[s, int(W[t + 1, i, j])]
        if t >= 1:
            # step t-1 -> t: w(t) sets the precision (and the attraction under `current`)
            _slice_residual(mu, W, t, beta, current, u, d)
            fill_q0(W[t], alpha, c, q0)
            ld = chol_logdet(q0, L)
            score[s] += ld - 0.5 * quad_form(q0, d, d) / sigma2
        if (not current) and t < T - 1:
            # step t -> t+1: w(t) sets the attraction only
            _slice_residual(mu, W, t + 1, beta, current, u, d)
            fill_q0(W[t + 1], alpha, c, q0)
            score[s] += -0.5 * quad_form(q0, d, d) / sigma2
    W[t, i, j] = old
    W[t, j, i] = old
    return score[1] - score[0]


@njit(cache=True)
def sweep_edges(mu, W, uniforms, order, alpha, beta, c, sigma2, lp_init, lp_trans, current):
    """One Gibbs pass over the edges listed in ``order`` (rows ``(t, i, j)``).

    ``uniforms`` has one U(0, 1) draw per row. Returns the number of flips.
    """
    n = mu.shape[1]
    q0 = np.empty((n, n))
    L = np.zeros((n, n))
    u = np.empty((n, 2))
    d = np.empty((n, 2))
    flips = 0
    for r in range(order.shape[0]):
        t = order[r, 0]
        i = order[r, 1]
        j = order[r, 2]
        lo = edge_log_odds(mu, W, t, i, j, alpha, beta, c, sigma2, lp_init, lp_trans,
                           current, q0, L, u, d)
        if lo >= 0.0:
            p = 1.0 / (1.0 + np.exp(-lo))
        else:
            e = np.exp(lo)
            p = e / (1.0 + e)
        new = 1.0 if uniforms[r] < p else 0.0
        if new != W[t, i, j]:
            flips += 1
            W[t, i, j] = new
            W[t, j, i] = new
    return flips
