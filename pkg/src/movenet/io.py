"""File formats: telemetry input, run configuration and CSV/JSON outputs.

All floats are written with 17 significant digits so every CSV re-reads to
the identical values.
"""
from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import dataclass, field, fields, asdict
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .core import TrajectoryGrid
from .imputation import ImputationBank, ObservationSet, Track

TELEMETRY_COLUMNS = ("id", "time", "x", "y", "error_sd")
UNITS = {"position": "km", "time": "hours"}


class ConfigError(ValueError):
    pass


class TelemetryError(ValueError):
    pass


def fmt(value) -> str:
    return format(float(value), ".17g")


# ---------------------------------------------------------------------------
# configuration

@dataclass
class RunConfig:
    """Flat run configuration shared by every command."""

    input: str | None = None
    input_kind: str = "telemetry"          # telemetry | paths | bank
    out: str = "out"
    seed: int = 0
    # simulation
    n: int = 6
    T: int = 100
    alpha: float = 0.9
    beta: float = 0.5
    p1: float = 0.2
    phi: float = 0.95
    c: float = 0.33
    sigma2: float = 1.0
    time_step: float = 1.0
    init_spread: float = 5.0
    obs_per_individual: int = 150
    obs_error_sd: float = 0.5
    ego: str = "previous"
    # imputation
    K: int = 50
    grid_start: float | None = None
    grid_spacing: float | None = None
    grid_points: int = 100
    error_classes: dict | None = None
    # sampler
    n_iter: int = 20000
    burn_in: int = 5000
    thin: int = 5
    beta_var: float = 1e3
    phi_a: float = 17.2
    phi_b: float = 1.5
    c_shape: float = 1.5
    c_scale: float = 3.5
    sigma2_shape: float = 0.1
    sigma2_scale: float = 1e-3
    scale_alpha: float = 0.3
    scale_beta: float = 0.05
    scale_c: float = 0.3
    scale_network: float = 0.3
    adapt_window: int = 50
    exact_beta: bool = False
    random_scan: bool = False
    # baseline
    radii: list = field(default_factory=lambda: [5.0, 7.5, 10.0, 12.5, 15.0])
    target_density: float | None = None
    radius_grid: list | None = None
    # summarize
    chains: str | None = None
    network: str | None = None
    level: float = 0.95
    threshold: float = 0.5

    def __post_init__(self):
        if self.input_kind not in ("telemetry", "paths", "bank"):
            raise ConfigError(f"unknown input_kind {self.input_kind!r}")
        if self.K < 1:
            raise ConfigError("K must be at least 1")
        if self.grid_spacing is not None and not self.grid_spacing > 0:
            raise ConfigError("grid_spacing must be positive")
        if self.seed is None:
            raise ConfigError("a seed is required")
        if self.n < 2 or self.T < 2:
            raise ConfigError("need n >= 2 and T >= 2")
        if any(not r > 0 for r in self.radii):
            raise ConfigError("radii must be positive")

    @classmethod
    def from_dict(cls, values: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        try:
            return cls(**values)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc

    def to_dict(self) -> dict:
        return asdict(self)

    def digest(self) -> str:
        text = json.dumps(self.to_dict(), sort_keys=True)
        return hashlib.sha256(text.encode()).hexdigest()


def load_config(path) -> RunConfig:
    with open(path) as fh:
        try:
            values = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(values, dict):
        raise ConfigError("config must be a flat JSON object")
    return RunConfig.from_dict(values)


# ---------------------------------------------------------------------------
# telemetry

def _parse_times(raw: list[str]):
    try:
        return [float(v) for v in raw], None
    except ValueError:
        pass
    stamps = []
    for v in raw:
        try:
            d = datetime.fromisoformat(v.strip().replace("Z", "+00:00"))
        except ValueError as exc:
            raise TelemetryError(f"cannot parse time {v!r}") from exc
        if d.tzinfo is None:
            d = d.replace(tzinfo=timezone.utc)
        stamps.append(d)
    origin = min(stamps)
    hours = [(d - origin).total_seconds() / 3600.0 for d in stamps]
    return hours, origin.isoformat()


def ingest_telemetry(path, error_classes: dict | None = None) -> ObservationSet:
    """Read ``id,time,x,y,error_sd`` rows into a validated observation set.

    ``time`` is either numeric (hours) or ISO-8601, converted to hours since
    the earliest fix. An ``error_class`` column may replace ``error_sd`` when
    ``error_classes`` maps each class label to an SD in km.
    """
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        rows = list(reader)
    use_class = "error_sd" not in header and "error_class" in header
    needed = [c for c in TELEMETRY_COLUMNS if not (use_class and c == "error_sd")]
    missing = [c for c in needed if c not in header]
    if missing:
        raise TelemetryError(f"{path}: missing column(s) {missing}")
    if use_class and not error_classes:
        raise TelemetryError("error_class column requires an error_classes mapping")
    if not rows:
        raise TelemetryError(f"{path}: no telemetry rows")

    times, origin = _parse_times([r["time"] for r in rows])
    per_id: dict[str, list] = {}
    for lineno, (row, t) in enumerate(zip(rows, times), start=2):
        try:
            x, y = float(row["x"]), float(row["y"])
            if use_class:
                sd = float(error_classes[row["error_class"]])
            else:
                sd = float(row["error_sd"])
        except (ValueError, KeyError) as exc:
            raise TelemetryError(f"row {lineno}: bad value ({exc})") from exc
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(t)):
            raise TelemetryError(f"row {lineno}: non-finite value")
        if not sd > 0:
            raise TelemetryError(f"row {lineno}: error_sd must be positive")
        per_id.setdefault(row["id"], []).append((t, x, y, sd, lineno))

    tracks = {}
    for key, recs in per_id.items():
        recs.sort(key=lambda r: r[0])
        for a, b in zip(recs, recs[1:]):
            if b[0] <= a[0]:
                raise TelemetryError(f"row {b[4]}: duplicate time {b[0]} for id {key!r} "
                                     f"(also row {a[4]})")
        if len(recs) < 2:
            raise TelemetryError(f"id {key!r} has fewer than two fixes")
        arr = np.array([r[:4] for r in recs])
        tracks[key] = Track(times=arr[:, 0], xy=arr[:, 1:3], error_sd=arr[:, 3])
    return ObservationSet(tracks=tracks, time_origin=origin)


def write_telemetry(path, obs: ObservationSet):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TELEMETRY_COLUMNS)
        for key, tr in obs.tracks.items():
            for t, (x, y), sd in zip(tr.times, tr.xy, tr.error_sd):
                w.writerow([key, fmt(t), fmt(x), fmt(y), fmt(sd)])


# ---------------------------------------------------------------------------
# paths and banks

def write_paths(path, grid: TrajectoryGrid):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["id", "t", "x", "y"])
        for i, key in enumerate(grid.individual_ids):
            for t, (x, y) in zip(grid.times, grid.positions[i]):
                w.writerow([key, fmt(t), fmt(x), fmt(y)])


def _regular(times: np.ndarray) -> float:
    if len(times) < 2:
        raise ValueError("need at least two grid times")
    step = np.diff(times)
    if not np.allclose(step, step[0], rtol=1e-9, atol=1e-12):
        raise ValueError("grid times are not regularly spaced")
    return float(step[0])


def read_paths(path) -> TrajectoryGrid:
    data: dict[str, list] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            data.setdefault(row["id"], []).append((float(row["t"]), float(row["x"]), float(row["y"])))
    if not data:
        raise ValueError(f"{path}: no rows")
    ids = list(data)
    arrs = [np.array(sorted(data[k])) for k in ids]
    times = arrs[0][:, 0]
    if any(a.shape != arrs[0].shape or not np.array_equal(a[:, 0], times) for a in arrs):
        raise ValueError("paths must share one time grid")
    step = _regular(times)
    pos = np.stack([a[:, 1:] for a in arrs])
    return TrajectoryGrid(pos, time_step=step, individual_ids=ids, start=float(times[0]))


def write_bank(path, bank: ImputationBank):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["draw_index", "id", "t", "x", "y"])
        for k in range(bank.K):
            for i, key in enumerate(bank.individual_ids):
                for t, (x, y) in zip(bank.times, bank.draws[k, i]):
                    w.writerow([k, key, fmt(t), fmt(x), fmt(y)])


def read_bank(path) -> ImputationBank:
    rows: dict[tuple, list] = {}
    ids: list[str] = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            key = row["id"]
            if key not in ids:
                ids.append(key)
            rows.setdefault((int(row["draw_index"]), key), []).append(
                (float(row["t"]), float(row["x"]), float(row["y"])))
    if not rows:
        raise ValueError(f"{path}: no rows")
    K = max(k for k, _ in rows) + 1
    first = np.array(sorted(rows[(0, ids[0])]))
    times = first[:, 0]
    draws = np.empty((K, len(ids), len(times), 2))
    for (k, key), recs in rows.items():
        arr = np.array(sorted(recs))
        if not np.array_equal(arr[:, 0], times):
            raise ValueError("bank draws must share one time grid")
        draws[k, ids.index(key)] = arr[:, 1:]
    return ImputationBank(draws=draws, times=times, individual_ids=ids)


# ---------------------------------------------------------------------------
# networks and chains

def write_network(path, ids, times, mean, sd=None):
    """Upper-triangle rows ``i,j,t,mean,sd`` for an ``(n, n, T)`` array."""
    mean = np.asarray(mean, dtype=float)
    sd = np.zeros_like(mean) if sd is None else np.asarray(sd, dtype=float)
    n = len(ids)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["i", "j", "t", "mean", "sd"])
        for a in range(n):
            for b in range(a + 1, n):
                for k, t in enumerate(times):
                    w.writerow([ids[a], ids[b], fmt(t), fmt(mean[a, b, k]), fmt(sd[a, b, k])])


def read_network(path):
    """Return ``(ids, times, mean, sd)`` with symmetric ``(n, n, T)`` arrays."""
    recs = []
    ids: list[str] = []
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            for key in (row["i"], row["j"]):
                if key not in ids:
                    ids.append(key)
            recs.append((row["i"], row["j"], float(row["t"]), float(row["mean"]), float(row["sd"])))
    if not recs:
        raise ValueError(f"{path}: no rows")
    times = sorted({r[2] for r in recs})
    tindex = {t: k for k, t in enumerate(times)}
    n, T = len(ids), len(times)
    mean = np.zeros((n, n, T))
    sd = np.zeros((n, n, T))
    for i, j, t, m, s in recs:
        a, b, k = ids.index(i), ids.index(j), tindex[t]
        mean[a, b, k] = mean[b, a, k] = m
        sd[a, b, k] = sd[b, a, k] = s
    return ids, np.array(times), mean, sd


def write_chains(path, iterations, chains: dict):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iter", "param", "value"])
        for name, values in chains.items():
            for it, v in zip(iterations, values):
                w.writerow([int(it), name, fmt(v)])


def read_chains(path) -> tuple[np.ndarray, dict]:
    chains: dict[str, list] = {}
    iters: dict[str, list] = {}
    with open(path, newline="") as fh:
        for row in csv.DictReader(fh):
            chains.setdefault(row["param"], []).append(float(row["value"]))
            iters.setdefault(row["param"], []).append(int(row["iter"]))
    if not chains:
        raise ValueError(f"{path}: no rows")
    first = next(iter(iters.values()))
    return np.array(first), {k: np.array(v) for k, v in chains.items()}


def write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(_jsonable(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
