"""Command line: ``movenet simulate|impute|fit|baseline|summarize --config FILE``."""
from __future__ import annotations

import argparse
import logging
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baseline import averaged_proximity, density_matched_radius, mean_density
from .core import ModelParams
from .imputation import build_bank, common_grid, fit_all
from .inference import PARAM_NAMES, Priors, SamplerConfig, effective_sample_size, run_mcmc
from .io import (UNITS, RunConfig, load_config, ingest_telemetry, read_bank, read_chains,
                 read_network, read_paths, write_bank, write_chains, write_json, write_network,
                 write_paths, write_rows, write_telemetry, ConfigError)
from .scenarios import observe, simulation_study
from .summaries import credible_intervals, network_statistics

logger = logging.getLogger("movenet")


def _out(config: RunConfig) -> Path:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _versions() -> dict:
    import numba
    import scipy
    return {"movenet": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
            "numba": numba.__version__, "python": platform.python_version()}


def _require_input(config: RunConfig) -> Path:
    if not config.input:
        raise ConfigError("this command needs an 'input' path")
    path = Path(config.input)
    if not path.exists():
        raise ConfigError(f"input {path} does not exist")
    return path


def _impute(config: RunConfig, obs, rng):
    models = fit_all(obs)
    grid = common_grid(obs, spacing=config.grid_spacing, n_points=config.grid_points,
                       start=config.grid_start)
    bank = build_bank(models, obs, grid, K=config.K, rng=rng)
    return models, bank


def _load_bank(config: RunConfig, rng):
    """Imputation bank for ``fit``/``baseline`` plus the CTCRW fits, if any."""
    path = _require_input(config)
    if config.input_kind == "paths":
        return None, read_paths(path)
    if config.input_kind == "bank":
        return None, read_bank(path)
    return _impute(config, ingest_telemetry(path, config.error_classes), rng)


def cmd_simulate(config: RunConfig) -> dict:
    try:
        params = ModelParams(config.alpha, config.beta, config.p1, config.phi, config.c,
                             config.sigma2)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    grid, W = simulation_study(config.seed, n=config.n, T=config.T, params=params,
                               init_spread=config.init_spread, ego=config.ego)
    if config.time_step != 1.0:
        grid.time_step = config.time_step
    obs_rng = np.random.default_rng([config.seed, 1])
    obs = observe(grid, config.obs_per_individual, config.obs_error_sd, obs_rng)
    out = _out(config)
    files = {"network": out / "truth_network.csv", "paths": out / "true_paths.csv",
             "observations": out / "observations.csv"}
    write_network(files["network"], grid.individual_ids, grid.times, W.edges)
    write_paths(files["paths"], grid)
    write_telemetry(files["observations"], obs)
    return files


def cmd_impute(config: RunConfig) -> dict:
    rng = np.random.default_rng(config.seed)
    obs = ingest_telemetry(_require_input(config), config.error_classes)
    models, bank = _impute(config, obs, rng)
    out = _out(config)
    files = {"bank": out / "bank.csv", "ctcrw": out / "ctcrw.json"}
    write_bank(files["bank"], bank)
    write_json(files["ctcrw"], {
        key: {"theta": m.theta, "sigma_v2": m.sigma_v2, "loglik": m.loglik, "n_obs": m.n_obs,
              "low_information": m.low_information} for key, m in models.items()})
    return files


def sampler_config(config: RunConfig) -> SamplerConfig:
    priors = Priors(beta_var=config.beta_var, phi_a=config.phi_a, phi_b=config.phi_b,
                    c_shape=config.c_shape, c_scale=config.c_scale,
                    sigma2_shape=config.sigma2_shape, sigma2_scale=config.sigma2_scale)
    return SamplerConfig(n_iter=config.n_iter, burn_in=config.burn_in, thin=config.thin,
                         seed=config.seed, priors=priors, scale_alpha=config.scale_alpha,
                         scale_beta=config.scale_beta, scale_c=config.scale_c,
                         scale_network=config.scale_network, adapt_window=config.adapt_window,
                         ego=config.ego, random_scan=config.random_scan,
                         exact_beta=config.exact_beta)


def cmd_fit(config: RunConfig) -> dict:
    # imputation and sampling get separate streams so either can be rerun alone
    models, bank = _load_bank(config, np.random.default_rng([config.seed, 2]))
    samples = run_mcmc(bank, sampler_config(config))
    out = _out(config)
    files = {"chains": out / "chains.csv", "network": out / "network.csv",
             "manifest": out / "manifest.json"}
    write_chains(files["chains"], samples.iterations, samples.chains)
    write_network(files["network"], samples.individual_ids, samples.times, samples.w_mean,
                  samples.w_sd)
    ess = {k: effective_sample_size(v) if np.ptp(v) > 0 else 0.0
           for k, v in samples.chains.items()}
    manifest = {
        "command": "fit",
        "seed": config.seed,
        "config": config.to_dict(),
        "config_sha256": config.digest(),
        "versions": _versions(),
        "units": UNITS,
        "input_kind": config.input_kind,
        "K": getattr(bank, "K", 1),
        "acceptance": samples.acceptance,
        "ess": ess,
        "n_network_samples": samples.n_network_samples,
    }
    if models is not None:
        manifest["ctcrw"] = {k: {"theta": m.theta, "sigma_v2": m.sigma_v2}
                             for k, m in models.items()}
    write_json(files["manifest"], manifest)
    return files


def cmd_baseline(config: RunConfig) -> dict:
    _, bank = _load_bank(config, np.random.default_rng([config.seed, 2]))
    ids = bank.individual_ids
    times = bank.times
    out = _out(config)
    files = {}
    report = {"radii": {}, "units": UNITS}
    radii = list(config.radii)
    if config.target_density is not None:
        grid = config.radius_grid or radii
        matched = density_matched_radius(bank, config.target_density, grid)
        report["density_matched_radius"] = matched
        report["target_density"] = config.target_density
        if matched not in radii:
            radii.append(matched)
    for R in radii:
        prox = averaged_proximity(bank, R)
        path = out / f"proximity_R{R:g}.csv"
        write_network(path, ids, times, prox.values)
        files[f"R{R:g}"] = path
        report["radii"][f"{R:g}"] = {"file": path.name, "mean_density": mean_density(prox.values)}
    files["report"] = out / "baseline.json"
    write_json(files["report"], report)
    return files


def cmd_summarize(config: RunConfig) -> dict:
    if not config.chains and not config.network:
        raise ConfigError("summarize needs 'chains' and/or 'network' paths")
    out = _out(config)
    files = {}
    report = {"level": config.level, "threshold": config.threshold}
    if config.chains:
        iters, chains = read_chains(config.chains)
        names = [p for p in PARAM_NAMES if p in chains] + [p for p in chains if p not in PARAM_NAMES]
        intervals = credible_intervals(chains, level=config.level, names=names)
        files["intervals"] = out / "intervals.csv"
        write_rows(files["intervals"], ["parameter", "median", "lo", "hi"],
                   [(s.name, s.median, s.lower, s.upper) for s in intervals])
        report["intervals"] = {s.name: {"median": s.median, "lo": s.lower, "hi": s.upper}
                               for s in intervals}
        report["ess"] = {k: effective_sample_size(v) if len(v) >= 10 and np.ptp(v) > 0 else 0.0
                         for k, v in chains.items()}
    if config.network:
        ids, times, mean, sd = read_network(config.network)
        stats = network_statistics(mean, config.threshold)
        files["network_stats"] = out / "network_stats.csv"
        write_rows(files["network_stats"], ["t", "density", "transitivity"],
                   zip(times, stats.density, stats.transitivity))
        files["degrees"] = out / "degrees.csv"
        write_rows(files["degrees"], ["id", "t", "degree"],
                   [(key, t, float(stats.degree[a, k])) for a, key in enumerate(ids)
                    for k, t in enumerate(times)])
        files["mode_network"] = out / "mode_network.csv"
        write_network(files["mode_network"], ids, times, (mean > config.threshold).astype(float))
        report["network"] = {"mean_density": float(stats.density.mean()),
                             "max_edge_mean": float(mean.max())}
    files["summary"] = out / "summary.json"
    write_json(files["summary"], report)
    return files


COMMANDS = {"simulate": cmd_simulate, "impute": cmd_impute, "fit": cmd_fit,
            "baseline": cmd_baseline, "summarize": cmd_summarize}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="movenet", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat JSON config file")
        p.add_argument("--seed", type=int, help="overrides the config seed")
        p.add_argument("--out", help="output directory (overrides the config)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = load_config(args.config) if args.config else RunConfig()
        overrides = config.to_dict()
        if args.seed is not None:
            overrides["seed"] = args.seed
        if args.out is not None:
            overrides["out"] = args.out
        config = RunConfig.from_dict(overrides)
        files = COMMANDS[args.command](config)
    except (ConfigError, ValueError) as exc:
        print(f"movenet {args.command}: error: {exc}", file=sys.stderr)
        return 2
    for label, path in files.items():
        print(f"{label}: {path}")
    return 0
