"""Experiment orchestration: config validation, task planning, deterministic
parallel execution, persistence and resume.

A run directory is a pure function of (config, seed, code version): every task
is an independent (engine, nu0) pair whose output file depends only on the
task itself, so results are byte-identical for any worker count and any
interleaving.  The manifest records per-task status and file checksums;
`resume` re-executes only tasks that are missing or fail their checksum.
"""

from __future__ import annotations

import hashlib
import json
import multiprocessing
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .basis import build_basis
from .classical import run as classical_run, sample_microcanonical
from .quantum import (MaskPolicy, evolve_direct, evolve_floquet,
                      floquet_decompose, initial_state, one_period_op)
from .series import ObservableSeries, geometric_checkpoints
from .units import derive_params

__all__ = [
    "ConfigError", "load_config", "config_hash", "plan_tasks",
    "run_experiment", "resume", "analyze", "nu0_values",
]


class ConfigError(ValueError):
    pass


_DEFAULTS = {
    "engine": "both",
    "numerics": {
        "q_max": 2000.0,
        "n_grid": 1600,
        "E_cut": None,
        "use_mask": True,
        "mask": {"q_on_frac": 0.8, "exponent": 0.125, "per_period": 3},
        "n_traj": 10000,
        "seed": 0,
        "method": "auto",          # auto | direct | floquet
        "direct_threshold": 2000,  # K_max above which Floquet evolution is used
        "with_hist": False,
    },
    "schedule": {"K_max": 1000, "ratio": 1.25},
    "analysis": [],
}


def _merge(base: dict, override: dict) -> dict:
    out = dict(base)
    for k, v in override.items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


def validate_config(cfg: dict) -> dict:
    """Fill defaults and check every field before any computation starts."""
    if "params" not in cfg:
        raise ConfigError("config needs a 'params' section")
    merged = _merge(_DEFAULTS, cfg)
    p = merged["params"]
    for key in ("n_i", "nu0", "F0av"):
        if key == "nu0" and "nu0_grid" in p:
            continue
        if key not in p:
            raise ConfigError(f"params.{key} missing")
    if "nu0_grid" in p:
        g = p["nu0_grid"]
        for key in ("start", "stop", "count"):
            if key not in g:
                raise ConfigError(f"params.nu0_grid.{key} missing")
        if g["count"] < 1 or g["stop"] < g["start"]:
            raise ConfigError("invalid nu0_grid")
    if merged["engine"] not in ("quantum", "classical", "both"):
        raise ConfigError(f"unknown engine {merged['engine']!r}")
    num = merged["numerics"]
    if num["q_max"] <= 0 or num["n_grid"] < 16:
        raise ConfigError("invalid numerics: q_max > 0 and n_grid >= 16 required")
    if num["n_traj"] < 1:
        raise ConfigError("numerics.n_traj must be >= 1")
    if num["method"] not in ("auto", "direct", "floquet"):
        raise ConfigError(f"unknown method {num['method']!r}")
    sched = merged["schedule"]
    if sched["K_max"] < 0 or sched["ratio"] <= 1.0:
        raise ConfigError("schedule needs K_max >= 0 and ratio > 1")
    # fail early on unphysical parameters
    derive_params(p["n_i"], p.get("nu0", p.get("nu0_grid", {}).get("start", 1.0)),
                  p["F0av"], p.get("kick_sign", 1))
    return merged


def load_config(path) -> dict:
    with open(path) as fh:
        raw = yaml.safe_load(fh)
    if not isinstance(raw, dict):
        raise ConfigError(f"{path} does not contain a mapping")
    return validate_config(raw)


def config_hash(cfg: dict) -> str:
    return hashlib.sha256(
        json.dumps(cfg, sort_keys=True, default=str).encode()).hexdigest()


def nu0_values(cfg: dict) -> list[float]:
    p = cfg["params"]
    if "nu0_grid" in p:
        g = p["nu0_grid"]
        return [float(v) for v in np.linspace(g["start"], g["stop"], int(g["count"]))]
    return [float(p["nu0"])]


@dataclass(frozen=True)
class TaskSpec:
    engine: str
    nu0: float

    @property
    def task_id(self) -> str:
        return f"{self.engine}/nu0_{self.nu0:.12g}"


def plan_tasks(cfg: dict) -> list[TaskSpec]:
    engines = ["quantum", "classical"] if cfg["engine"] == "both" else [cfg["engine"]]
    return [TaskSpec(engine=e, nu0=v) for e in engines for v in nu0_values(cfg)]


@lru_cache(maxsize=4)
def _cached_basis(q_max: float, n_grid: int, E_cut):
    return build_basis(q_max, n_grid, E_cut=E_cut)


def _checkpoints(cfg: dict) -> np.ndarray:
    sched = cfg["schedule"]
    return geometric_checkpoints(int(sched["K_max"]), float(sched["ratio"]))


def execute_task(cfg: dict, task: TaskSpec, out_dir: str) -> dict[str, str]:
    """Run one (engine, nu0) task; returns {relative path: sha256}."""
    p = cfg["params"]
    num = cfg["numerics"]
    params = derive_params(p["n_i"], task.nu0, p["F0av"], p.get("kick_sign", 1))
    cps = _checkpoints(cfg)
    K_max = int(cfg["schedule"]["K_max"])
    if task.engine == "classical":
        ens = sample_microcanonical(params, int(num["n_traj"]), int(num["seed"]))
        series = classical_run(ens, K_max, cps, with_hist=num["with_hist"])
    else:
        basis = _cached_basis(float(num["q_max"]), int(num["n_grid"]), num["E_cut"])
        mask = None
        if num["use_mask"]:
            mcfg = num["mask"]
            mask = MaskPolicy(q_on=mcfg["q_on_frac"] * basis.q_max,
                              exponent=mcfg["exponent"],
                              applications_per_period=mcfg["per_period"])
        op = one_period_op(basis, params, mask)
        state = initial_state(basis, params.n_i)
        method = num["method"]
        if method == "auto":
            method = "direct" if K_max <= num["direct_threshold"] else "floquet"
        if method == "direct":
            series = evolve_direct(state, op, K_max, cps, with_hist=num["with_hist"])
        else:
            decomp = floquet_decompose(op, state)
            series = evolve_floquet(decomp, cps, params, with_hist=num["with_hist"])
    rel = Path("series") / task.engine / f"nu0_{task.nu0:.12g}" / "series.txt"
    dest = Path(out_dir) / rel
    dest.parent.mkdir(parents=True, exist_ok=True)
    tmp = dest.with_suffix(".tmp")
    with open(tmp, "w") as fh:
        fh.write(series.to_text())
    os.replace(tmp, dest)
    files = {str(rel): _sha256(dest)}
    if series.hist is not None:
        hist_rel = str(rel) + ".hist.npz"
        np.savez(str(dest) + ".hist.npz", K=series.K, n_bins=series.n_bins,
                 hist=series.hist)
        files[hist_rel] = _sha256(Path(out_dir) / hist_rel)
    return files


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _write_manifest(out_dir: Path, manifest: dict) -> None:
    tmp = out_dir / "manifest.json.tmp"
    with open(tmp, "w") as fh:
        json.dump(manifest, fh, indent=1, sort_keys=True)
    os.replace(tmp, out_dir / "manifest.json")


def _pool_entry(args):
    cfg, task, out_dir = args
    return task.task_id, execute_task(cfg, task, out_dir)


def run_experiment(cfg: dict, out_dir, workers: int = 1,
                   resuming: bool = False) -> dict:
    """Execute the task graph, persisting results and the manifest incrementally.

    Partial failures leave completed tasks on disk with their checksums in the
    manifest; the raised error carries the failed task ids.
    """
    cfg = validate_config(cfg)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    chash = config_hash(cfg)
    manifest_path = out / "manifest.json"
    if manifest_path.exists():
        with open(manifest_path) as fh:
            manifest = json.load(fh)
        if manifest["config_hash"] != chash:
            if not resuming:
                raise ConfigError(f"{out} already holds a run with a different config")
            raise ConfigError(
                "stored manifest was produced by a different config "
                f"(stored {manifest['config_hash'][:12]}, current {chash[:12]})")
    else:
        manifest = {"config_hash": chash, "code_version": __version__,
                    "seed": cfg["numerics"]["seed"],
                    "rng": f"philox(key={cfg['numerics']['seed']})",
                    "tasks": {}}
    with open(out / "config.yaml", "w") as fh:
        yaml.safe_dump(cfg, fh, sort_keys=True)

    tasks = plan_tasks(cfg)
    pending = []
    for task in tasks:
        entry = manifest["tasks"].get(task.task_id)
        if entry and entry.get("status") == "done":
            ok = all((out / rel).exists() and _sha256(out / rel) == digest
                     for rel, digest in entry["files"].items())
            if ok:
                continue
        pending.append(task)

    t_start = time.time()
    if workers <= 1 or len(pending) <= 1:
        results = ((t.task_id, execute_task(cfg, t, str(out))) for t in pending)
        for task_id, files in results:
            manifest["tasks"][task_id] = {"status": "done", "files": files}
            _write_manifest(out, manifest)
    else:
        # spawn: forking a process that already initialised OpenMP/threaded
        # BLAS is unsafe and aborts on some platforms
        ctx = multiprocessing.get_context("spawn")
        with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
            args = [(cfg, t, str(out)) for t in pending]
            for (task, result) in zip(pending, pool.map(_pool_entry, args)):
                task_id, files = result
                manifest["tasks"][task_id] = {"status": "done", "files": files}
                _write_manifest(out, manifest)
    manifest["wall_clock_s"] = round(time.time() - t_start, 3)
    _write_manifest(out, manifest)
    return manifest


def resume(out_dir, workers: int = 1) -> dict:
    """Complete the unfinished tasks of an interrupted run."""
    out = Path(out_dir)
    cfg = load_config(out / "config.yaml")
    return run_experiment(cfg, out, workers=workers, resuming=True)


def load_scan(out_dir, engine: str):
    """Assemble a FrequencyScan from a finished run directory."""
    from .analysis import FrequencyScan
    out = Path(out_dir)
    base = out / "series" / engine
    items = []
    for sub in base.iterdir():
        if sub.name.startswith("nu0_"):
            nu0 = float(sub.name[4:])
            items.append((nu0, ObservableSeries.load(sub / "series.txt")))
    if not items:
        raise FileNotFoundError(f"no {engine} series under {out}")
    items.sort(key=lambda t: t[0])
    nu0s = np.array([t[0] for t in items])
    K_list = items[0][1].K
    values = np.column_stack([s.P_sur for _, s in items])
    mean_n = np.column_stack([s.mean_n for _, s in items])
    return FrequencyScan(nu0_grid=nu0s, K_list=K_list, values=values,
                         engine_tag=engine, mean_n=mean_n)


def analyze(out_dir, passes: list[dict] | None = None) -> dict:
    """Run the configured post-processing passes over a finished run."""
    from . import analysis as ana
    out = Path(out_dir)
    cfg = load_config(out / "config.yaml")
    passes = passes if passes is not None else cfg.get("analysis", [])
    results = {}
    for spec in passes:
        op = spec["op"]
        engine = spec.get("engine", "classical")
        if op == "fit_power_law":
            scan = load_scan(out, engine)
            col = int(spec.get("column", 0))
            fit = ana.fit_power_law(scan.K_list, scan.values[:, col],
                                    tuple(spec["window"]))
            results[f"{op}_{engine}"] = {
                "alpha": fit.alpha, "K0": fit.K0, "residual": fit.residual}
        elif op == "extrema_spacing":
            scan = load_scan(out, engine)
            spacings = {int(K): ana.extrema_spacing(scan.nu0_grid, scan.row(int(K)))
                        for K in spec.get("K_list", scan.K_list[-1:])}
            results[f"{op}_{engine}"] = spacings
        elif op == "fractal_dimension":
            scan = load_scan(out, engine)
            K = int(spec.get("K", scan.K_list[-1]))
            sig = np.log10(np.maximum(scan.row(K), 1e-300))
            est = ana.fractal_dimension(sig, step=float(np.diff(scan.nu0_grid).mean()))
            results[f"{op}_{engine}_K{K}"] = {
                "plateau_D": est.plateau_D, "plateau_decades": est.plateau_decades,
                "plateau_ok": est.plateau_ok}
        else:
            raise ConfigError(f"unknown analysis op {op!r}")
    dest = out / "analysis"
    dest.mkdir(exist_ok=True)
    with open(dest / "analysis.json", "w") as fh:
        json.dump(results, fh, indent=1, sort_keys=True, default=float)
    return results
