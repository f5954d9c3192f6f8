"""Path imputation from irregular, noisy fixes.

Each individual is modelled on its own by a continuous-time correlated
random walk: velocity is an Ornstein-Uhlenbeck process

    dv = -theta v dt + sqrt(sigma_v2) dB,        dx = v dt,

observed through isotropic Gaussian position error. The two coordinate
axes are independent with identical dynamics and error variances, so the
state covariance is shared between axes and only the means differ.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .core import TrajectoryGrid

LOG_2PI = math.log(2.0 * math.pi)


@dataclass
class Track:
    """Fixes of one individual, sorted by time."""

    times: np.ndarray
    xy: np.ndarray
    error_sd: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.xy = np.asarray(self.xy, dtype=float).reshape(-1, 2)
        self.error_sd = np.broadcast_to(np.asarray(self.error_sd, dtype=float),
                                        self.times.shape).copy()
        if not (len(self.times) == len(self.xy) == len(self.error_sd)):
            raise ValueError("times, xy and error_sd must have equal length")
        if len(self.times) < 2:
            raise ValueError("need at least two fixes per individual")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("fix times must be strictly increasing")
        if not (np.all(np.isfinite(self.xy)) and np.all(np.isfinite(self.times))):
            raise ValueError("fixes must be finite")
        if np.any(self.error_sd < 0) or not np.all(np.isfinite(self.error_sd)):
            raise ValueError("error_sd must be finite and nonnegative")

    def __len__(self):
        return len(self.times)


@dataclass
class ObservationSet:
    tracks: dict
    time_origin: str | None = None
    time_unit: str = "hours"

    @property
    def ids(self) -> list:
        return list(self.tracks)


@dataclass
class CtcrwModel:
    theta: float
    sigma_v2: float
    init_pos_var: float = 1e4
    loglik: float = float("nan")
    n_obs: int = 0
    low_information: bool = False
    trace: list = field(default_factory=list, repr=False)

    def __post_init__(self):
        if not (self.theta > 0 and self.sigma_v2 >= 0 and self.init_pos_var > 0):
            raise ValueError("theta and init_pos_var must be positive, sigma_v2 nonnegative")


class CtcrwFitError(RuntimeError):
    def __init__(self, message, trace):
        super().__init__(f"{message}; trace: {trace}")
        self.trace = trace


@dataclass
class SmootherResult:
    """Filtered and smoothed per-axis states on the merged time axis.

    ``mean`` holds ``(position, velocity)`` by axis, shape ``(m, 2, 2)``
    indexed ``[time, state, axis]``; ``cov`` is the shared ``(m, 2, 2)``
    state covariance of either axis.
    """

    times: np.ndarray
    mean: np.ndarray
    cov: np.ndarray
    filter_mean: np.ndarray
    filter_cov: np.ndarray
    loglik: float
    grid_index: np.ndarray

    def state_mean(self) -> np.ndarray:
        """Means as ``(x, vx, y, vy)`` rows."""
        return self.mean.transpose(0, 2, 1).reshape(-1, 4)

    def state_cov(self) -> np.ndarray:
        """Block-diagonal ``4 x 4`` covariances in ``(x, vx, y, vy)`` order."""
        out = np.zeros((len(self.times), 4, 4))
        out[:, :2, :2] = self.cov
        out[:, 2:, 2:] = self.cov
        return out


@dataclass
class ImputationBank:
    """``K`` imputed path sets on a shared regular grid, ``draws[k, i, t, :]``."""

    draws: np.ndarray
    times: np.ndarray
    individual_ids: list

    def __post_init__(self):
        self.draws = np.asarray(self.draws, dtype=float)
        self.times = np.asarray(self.times, dtype=float)
        if self.draws.ndim != 4 or self.draws.shape[-1] != 2:
            raise ValueError("draws must have shape (K, n, T, 2)")
        if self.draws.shape[0] < 1:
            raise ValueError("bank must hold at least one draw")
        if self.draws.shape[2] != len(self.times) or self.draws.shape[1] != len(self.individual_ids):
            raise ValueError("draws do not match grid times or ids")

    @property
    def K(self) -> int:
        return self.draws.shape[0]

    def trajectory(self, k: int) -> TrajectoryGrid:
        step = float(self.times[1] - self.times[0])
        return TrajectoryGrid(self.draws[k], time_step=step,
                              individual_ids=self.individual_ids, start=float(self.times[0]))


# ---------------------------------------------------------------------------
# exact discretisation

def _vxx_factor(a: float) -> float:
    """``a - 2(1 - e^-a) + (1 - e^-2a)/2``, accurate for small ``a``."""
    if a < 0.05:
        total = 0.0
        term = 1.0
        for k in range(1, 13):
            term *= a / k
            if k >= 3:
                total += (-1) ** (k + 1) * (2.0 ** (k - 1) - 2.0) * term
        return total
    return a + 2.0 * math.expm1(-a) - 0.5 * math.expm1(-2.0 * a)


def transition(theta: float, sigma_v2: float, dt: float):
    """Transition matrix and noise covariance of ``(position, velocity)`` over ``dt``."""
    if dt == 0:
        return np.eye(2), np.zeros((2, 2))
    a = theta * dt
    em1 = math.expm1(-a)
    F = np.array([[1.0, -em1 / theta], [0.0, 1.0 + em1]])
    vvv = -math.expm1(-2.0 * a) / (2.0 * theta)
    vxv = em1 * em1 / (2.0 * theta ** 2)
    vxx = _vxx_factor(a) / theta ** 3
    return F, sigma_v2 * np.array([[vxx, vxv], [vxv, vvv]])


# ---------------------------------------------------------------------------
# filter / smoother

def _merged_axis(track: Track, grid, extrapolate: bool):
    grid = np.asarray([] if grid is None else grid, dtype=float)
    if grid.size and not extrapolate:
        lo, hi = track.times[0], track.times[-1]
        tol = 1e-9 * max(1.0, hi - lo)
        if grid.min() < lo - tol or grid.max() > hi + tol:
            raise ValueError("grid extends beyond the first/last fix of this individual")
        grid = np.clip(grid, lo, hi)
    span = max(1.0, float(np.ptp(np.concatenate([track.times, grid]))))
    tol = 1e-9 * span
    allt = np.sort(np.concatenate([track.times, grid]))
    keep = np.concatenate([[True], np.diff(allt) > tol])
    times = allt[keep]

    def locate(x):
        idx = np.searchsorted(times, x - tol)
        return idx

    obs_index = locate(track.times)
    grid_index = locate(grid) if grid.size else np.zeros(0, dtype=int)
    return times, obs_index, grid_index


def kalman_filter(model: CtcrwModel, track: Track, grid=None, extrapolate: bool = False):
    """Forward pass over the union of fix times and ``grid``.

    Returns ``(times, means, covs, pred_covs, transitions, loglik, grid_index)``
    with predicted covariances needed by the backward passes.
    """
    times, obs_index, grid_index = _merged_axis(track, grid, extrapolate)
    m = len(times)
    obs_at = np.full(m, -1)
    obs_at[obs_index] = np.arange(len(track))

    means = np.empty((m, 2, 2))
    covs = np.empty((m, 2, 2))
    pred_covs = np.empty((m, 2, 2))
    Fs = np.empty((m, 2, 2))

    first = track.xy[0]
    mean = np.array([first, [0.0, 0.0]])
    P = np.diag([model.init_pos_var, model.sigma_v2 / (2.0 * model.theta)])
    loglik = 0.0
    for k in range(m):
        if k > 0:
            F, Qd = transition(model.theta, model.sigma_v2, times[k] - times[k - 1])
            mean = F @ mean
            P = F @ P @ F.T + Qd
            Fs[k] = F
        else:
            Fs[k] = np.eye(2)
        pred_covs[k] = P
        j = obs_at[k]
        if j >= 0:
            S = P[0, 0] + track.error_sd[j] ** 2
            if not S > 0:
                raise FloatingPointError(f"innovation variance {S} is not positive at t={times[k]}")
            gain = P[:, 0] / S
            resid = track.xy[j] - mean[0]
            mean = mean + np.outer(gain, resid)
            P = P - S * np.outer(gain, gain)
            P = 0.5 * (P + P.T)
            loglik += -LOG_2PI - math.log(S) - 0.5 * float(resid @ resid) / S
        means[k] = mean
        covs[k] = P
    return times, means, covs, pred_covs, Fs, loglik, grid_index


def kalman_smoother(model: CtcrwModel, track: Track, grid=None,
                    extrapolate: bool = False) -> SmootherResult:
    """Rauch-Tung-Striebel smoothing on the fix times merged with ``grid``."""
    times, fm, fc, pc, Fs, loglik, grid_index = kalman_filter(model, track, grid, extrapolate)
    m = len(times)
    sm = fm.copy()
    sc = fc.copy()
    for k in range(m - 2, -1, -1):
        J = fc[k] @ Fs[k + 1].T @ np.linalg.pinv(pc[k + 1])
        sm[k] = fm[k] + J @ (sm[k + 1] - Fs[k + 1] @ fm[k])
        sc[k] = fc[k] + J @ (sc[k + 1] - pc[k + 1]) @ J.T
        sc[k] = 0.5 * (sc[k] + sc[k].T)
    return SmootherResult(times=times, mean=sm, cov=sc, filter_mean=fm, filter_cov=fc,
                          loglik=loglik, grid_index=grid_index)


def _sqrt_psd(C: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(C)
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def draw_paths(model: CtcrwModel, track: Track, grid, rng: np.random.Generator,
               size: int = 1, extrapolate: bool = False) -> np.ndarray:
    """Joint draws of positions on ``grid`` from the smoothing distribution.

    Forward filtering, backward sampling; returns ``(size, len(grid), 2)``.
    """
    times, fm, fc, pc, Fs, _, grid_index = kalman_filter(model, track, grid, extrapolate)
    m = len(times)
    x = np.empty((size, m, 2, 2))
    z = rng.standard_normal((m, size, 2, 2))
    x[:, -1] = fm[-1] + np.einsum("ab,sbc->sac", _sqrt_psd(fc[-1]), z[-1])
    for k in range(m - 2, -1, -1):
        J = fc[k] @ Fs[k + 1].T @ np.linalg.pinv(pc[k + 1])
        cond_cov = fc[k] - J @ Fs[k + 1] @ fc[k]
        cond_cov = 0.5 * (cond_cov + cond_cov.T)
        resid = x[:, k + 1] - (Fs[k + 1] @ fm[k])
        x[:, k] = (fm[k] + np.einsum("ab,sbc->sac", J, resid)
                   + np.einsum("ab,sbc->sac", _sqrt_psd(cond_cov), z[k]))
    return x[:, grid_index, 0, :]


def draw_path(model: CtcrwModel, track: Track, grid, rng: np.random.Generator,
              extrapolate: bool = False) -> np.ndarray:
    """One joint draw of this individual's positions on ``grid``, shape ``(G, 2)``."""
    return draw_paths(model, track, grid, rng, 1, extrapolate)[0]


# ---------------------------------------------------------------------------
# fitting

def ctcrw_loglik(track: Track, theta: float, sigma_v2: float, init_pos_var: float = 1e4) -> float:
    model = CtcrwModel(theta=theta, sigma_v2=sigma_v2, init_pos_var=init_pos_var)
    return kalman_filter(model, track)[5]


def _starting_points(track: Track, n_starts: int):
    dt = np.diff(track.times)
    med = float(np.median(dt))
    vel = np.diff(track.xy, axis=0) / dt[:, None]
    noise = (track.error_sd[1:] ** 2 + track.error_sd[:-1] ** 2) / dt ** 2
    var_v = max(float(np.mean(vel ** 2) - 0.5 * np.mean(noise)), 1e-6 * float(np.mean(vel ** 2)) + 1e-12)
    thetas = np.array([0.2, 1.0, 5.0])[:n_starts] / med
    return [np.log([th, 2.0 * th * var_v]) for th in thetas]


def fit_ctcrw(track: Track, n_starts: int = 3, init_pos_var: float = 1e4,
              maxiter: int = 2000) -> CtcrwModel:
    """Maximum-likelihood ``(theta, sigma_v2)`` by multi-start Nelder-Mead on logs."""
    low_info = len(track) < 4
    if low_info:
        warnings.warn(f"only {len(track)} fixes: CTCRW parameters are weakly identified",
                      UserWarning, stacklevel=2)

    def objective(z):
        if np.any(np.abs(z) > 40):
            return 1e300
        try:
            ll = ctcrw_loglik(track, math.exp(z[0]), math.exp(z[1]), init_pos_var)
        except FloatingPointError:
            return 1e300
        return -ll if np.isfinite(ll) else 1e300

    trace = []
    best = None
    for x0 in _starting_points(track, n_starts):
        res = optimize.minimize(objective, x0, method="Nelder-Mead",
                                options=dict(xatol=1e-6, fatol=1e-9, maxiter=maxiter))
        trace.append(dict(start=[float(v) for v in x0], x=[float(v) for v in res.x],
                          fun=float(res.fun), success=bool(res.success), message=str(res.message)))
        if res.fun < 1e299 and (best is None or res.fun < best.fun):
            best = res
    if best is None or not any(t["success"] for t in trace):
        raise CtcrwFitError("CTCRW likelihood optimisation did not converge", trace)
    theta, sigma_v2 = np.exp(best.x)
    return CtcrwModel(theta=float(theta), sigma_v2=float(sigma_v2), init_pos_var=init_pos_var,
                      loglik=-float(best.fun), n_obs=len(track), low_information=low_info,
                      trace=trace)


# ---------------------------------------------------------------------------
# bank

def common_grid(obs: ObservationSet, spacing: float | None = None,
                n_points: int = 100, start: float | None = None) -> np.ndarray:
    """Regular grid over the span shared by every individual."""
    lo = max(tr.times[0] for tr in obs.tracks.values())
    hi = min(tr.times[-1] for tr in obs.tracks.values())
    if start is not None:
        if start < lo:
            raise ValueError("grid start precedes the common observation span")
        lo = start
    if not hi > lo:
        raise ValueError("individual observation spans do not overlap")
    if spacing is None:
        if n_points < 2:
            raise ValueError("n_points must be at least 2")
        return np.linspace(lo, hi, n_points)
    if not spacing > 0:
        raise ValueError("spacing must be positive")
    count = int(math.floor((hi - lo) / spacing * (1 + 1e-12))) + 1
    return lo + spacing * np.arange(count)


def fit_all(obs: ObservationSet, **kwargs) -> dict:
    return {key: fit_ctcrw(track, **kwargs) for key, track in obs.tracks.items()}


def build_bank(models: dict, obs: ObservationSet, grid, K: int = 50,
               rng: np.random.Generator | None = None) -> ImputationBank:
    """Draw ``K`` aligned path sets; each individual gets its own RNG stream."""
    if K < 1:
        raise ValueError("K must be at least 1")
    rng = np.random.default_rng() if rng is None else rng
    grid = np.asarray(grid, dtype=float)
    ids = obs.ids
    streams = rng.spawn(len(ids))
    draws = np.empty((K, len(ids), len(grid), 2))
    for i, (key, stream) in enumerate(zip(ids, streams)):
        draws[:, i] = draw_paths(models[key], obs.tracks[key], grid, stream, size=K)
    return ImputationBank(draws=draws, times=grid, individual_ids=ids)
