"""Command-line interface.

Verbs:
  run         execute the experiment described by a YAML config
  resume      finish an interrupted run directory
  scan        run with a nu0 grid override (frequency scan)
  analyze     post-process a finished run directory
  golden-rule print the per-harmonic golden-rule rate table and tau_D
  ladder      build the photonic ladder model and report localization metrics
  thresholds  print the one-kick regime borders for a parameter set
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import __version__
from .ladder import assemble_matrix, build_ladder, localization_metrics
from .orchestrator import (ConfigError, analyze, load_config, resume,
                           run_experiment, validate_config)
from .stark import diagonalize_stark, golden_rule_rates
from .units import derive_params, thresholds


def _add_config_out(p: argparse.ArgumentParser, out_required: bool = True):
    p.add_argument("--config", required=True, help="YAML experiment config")
    p.add_argument("--out", required=out_required, help="output run directory")


def _apply_overrides(cfg: dict, args) -> dict:
    if getattr(args, "seed", None) is not None:
        cfg.setdefault("numerics", {})["seed"] = args.seed
    if getattr(args, "engine", None) is not None:
        cfg["engine"] = args.engine
    return cfg


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kickedatom",
        description="Kicked 1D Rydberg atom: simulation and analysis toolkit")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("run", help="execute an experiment config")
    _add_config_out(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=None, help="override numerics.seed")
    p.add_argument("--engine", choices=["quantum", "classical", "both"],
                   default=None, help="override the config engine")

    p = sub.add_parser("resume", help="finish an interrupted run directory")
    p.add_argument("--out", required=True)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("scan", help="run with a nu0 grid override")
    _add_config_out(p)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--engine", choices=["quantum", "classical", "both"],
                   default=None)
    p.add_argument("--nu0-start", type=float, required=True)
    p.add_argument("--nu0-stop", type=float, required=True)
    p.add_argument("--count", type=int, required=True)

    p = sub.add_parser("analyze", help="post-process a finished run")
    p.add_argument("--out", required=True)

    p = sub.add_parser("golden-rule", help="golden-rule rate table and tau_D")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="optional JSON output path")

    p = sub.add_parser("ladder", help="photonic-ladder localization metrics")
    p.add_argument("--config", required=True)
    p.add_argument("--k-min", type=int, default=None)
    p.add_argument("--k-max", type=int, default=None)
    p.add_argument("--out", default=None, help="optional JSON output path")

    p = sub.add_parser("thresholds", help="one-kick regime borders")
    p.add_argument("--config", default=None)
    p.add_argument("--n-i", type=int, default=None)
    p.add_argument("--nu0", type=float, default=None)
    p.add_argument("--f0av", type=float, default=None)
    return parser


def _params_from(args, cfg=None):
    if cfg is None:
        cfg = load_config(args.config)
    p = cfg["params"]
    nu0 = p.get("nu0")
    if nu0 is None:
        nu0 = p["nu0_grid"]["start"]
    return cfg, derive_params(p["n_i"], nu0, p["F0av"], p.get("kick_sign", 1))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _dispatch(args)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args) -> int:
    if args.verb == "run":
        cfg = _apply_overrides(load_config(args.config), args)
        manifest = run_experiment(cfg, args.out, workers=args.workers)
        done = sum(1 for t in manifest["tasks"].values() if t["status"] == "done")
        print(f"run complete: {done} task(s) in {args.out} "
              f"({manifest.get('wall_clock_s', 0.0)} s)")
        return 0

    if args.verb == "resume":
        manifest = resume(args.out, workers=args.workers)
        done = sum(1 for t in manifest["tasks"].values() if t["status"] == "done")
        print(f"resume complete: {done} task(s) in {args.out}")
        return 0

    if args.verb == "scan":
        cfg = _apply_overrides(load_config(args.config), args)
        cfg["params"].pop("nu0", None)
        cfg["params"]["nu0_grid"] = {"start": args.nu0_start,
                                     "stop": args.nu0_stop,
                                     "count": args.count}
        cfg = validate_config(cfg)
        manifest = run_experiment(cfg, args.out, workers=args.workers)
        done = sum(1 for t in manifest["tasks"].values() if t["status"] == "done")
        print(f"scan complete: {done} task(s) in {args.out}")
        return 0

    if args.verb == "analyze":
        results = analyze(args.out)
        print(json.dumps(results, indent=1, sort_keys=True, default=float))
        return 0

    if args.verb == "golden-rule":
        cfg, params = _params_from(args)
        num = cfg["numerics"]
        from .basis import build_basis
        basis = build_basis(num["q_max"], num["n_grid"], E_cut=num["E_cut"])
        spectrum = diagonalize_stark(basis, params.Fav)
        table = golden_rule_rates(spectrum, params)
        print(f"# m   E_m (a.u.)        Gamma_m (a.u.)")
        for m, E_m, g in zip(table.m, table.E_m, table.gamma_m):
            print(f"{m:6d}  {E_m: .9e}  {g: .9e}")
        print(f"total rate: {table.total_rate:.9e} a.u.")
        print(f"tau_D: {table.tau_D:.6e} a.u. = {table.tau_D_kicks:.6e} kicks")
        if args.out:
            with open(args.out, "w") as fh:
                json.dump({"m": table.m.tolist(), "E_m": table.E_m.tolist(),
                           "gamma_m": table.gamma_m.tolist(),
                           "tau_D": table.tau_D,
                           "tau_D_kicks": table.tau_D_kicks}, fh, indent=1)
        return 0

    if args.verb == "ladder":
        cfg, params = _params_from(args)
        ladder = build_ladder(params, k_min=args.k_min, k_max=args.k_max)
        matrix = assemble_matrix(ladder, abs(params.Fav))
        metrics = localization_metrics(matrix)
        print(f"rungs: {ladder.k_range.size} "
              f"(k in [{ladder.k_range[0]}, {ladder.k_range[-1]}])")
        print(f"band exponent: {matrix.band_exponent:.6f}")
        print(f"mean participation ratio: {metrics['pr_mean']:.4f}")
        print(f"max participation ratio:  {metrics['pr_max']:.4f}")
        print(f"initial-rung state: PR {metrics['k0_participation']:.4f}, "
              f"localization length {metrics['k0_localization_length']:.4f}")
        if args.out:
            with open(args.out, "w") as fh:
                json.dump({"n_rungs": int(ladder.k_range.size),
                           "band_exponent": matrix.band_exponent,
                           "pr_mean": metrics["pr_mean"],
                           "pr_max": metrics["pr_max"],
                           "k0_participation": metrics["k0_participation"],
                           "k0_localization_length":
                               metrics["k0_localization_length"]}, fh, indent=1)
        return 0

    if args.verb == "thresholds":
        if args.config:
            _, params = _params_from(args)
        else:
            if None in (args.n_i, args.nu0, args.f0av):
                raise ConfigError("need --config or all of --n-i --nu0 --f0av")
            params = derive_params(args.n_i, args.nu0, args.f0av)
        th = thresholds(params)
        print(f"n_i={params.n_i} nu0={params.nu0} F0av={params.F0av}")
        print(f"dp0            = {params.dp0:.6e}")
        print(f"dp0_dipole     = {th.dp0_dipole:.6e}")
        print(f"dp0_crit       = {th.dp0_crit:.6e}")
        print(f"m_c            = {th.m_c:.3f}")
        print(f"E_barrier      = {th.E_barrier:.6e} a.u. (q_b = {th.q_barrier:.3f})")
        print(f"regime         = {th.regime}")
        return 0

    raise ConfigError(f"unknown verb {args.verb!r}")  # pragma: no cover


if __name__ == "__main__":
    raise SystemExit(main())
