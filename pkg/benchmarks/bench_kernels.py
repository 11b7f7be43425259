"""Benchmark the compiled classical kernels against the pure-numpy fallback.

The kernel backend is chosen at import time from KICKEDATOM_DISABLE_NUMBA, so
each backend is timed in its own subprocess.  Usage:

    python3 benchmarks/bench_kernels.py [--n-traj 2000] [--kicks 500]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

_WORKER = r"""
import json, os, time
import numpy as np
from kickedatom import derive_params, sample_microcanonical, run_classical
from kickedatom import _kernels

n_traj = {n_traj}
kicks = {kicks}
params = derive_params(10, 1.45, 0.005)

# warm-up triggers compilation (no-op for the fallback)
ens = sample_microcanonical(params, 32, 0)
run_classical(ens, 8)

ens = sample_microcanonical(params, n_traj, 1)
t0 = time.perf_counter()
run_classical(ens, kicks)
ensemble_s = time.perf_counter() - t0

M = np.linspace(0.01, 2 * np.pi - 0.01, 100000)
_kernels.solve_kepler_radial_array(M[:16])
t0 = time.perf_counter()
_kernels.solve_kepler_radial_array(M)
kepler_s = time.perf_counter() - t0

print(json.dumps({{
    "backend": "numpy-fallback" if os.environ.get("KICKEDATOM_DISABLE_NUMBA") == "1"
               else "numba",
    "ensemble_s": ensemble_s,
    "kick_steps_per_s": n_traj * kicks / ensemble_s,
    "kepler_solves_per_s": M.size / kepler_s,
}}))
"""


def run_backend(disable_numba: bool, n_traj: int, kicks: int) -> dict:
    env = dict(os.environ)
    if disable_numba:
        env["KICKEDATOM_DISABLE_NUMBA"] = "1"
    else:
        env.pop("KICKEDATOM_DISABLE_NUMBA", None)
    code = _WORKER.format(n_traj=n_traj, kicks=kicks)
    out = subprocess.run([sys.executable, "-c", code], env=env,
                         capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n-traj", type=int, default=2000)
    ap.add_argument("--kicks", type=int, default=500)
    args = ap.parse_args()

    rows = [run_backend(False, args.n_traj, args.kicks),
            run_backend(True, args.n_traj, args.kicks)]
    print(f"{'backend':<16} {'kick steps/s':>14} {'Kepler solves/s':>16}")
    for r in rows:
        print(f"{r['backend']:<16} {r['kick_steps_per_s']:>14.3e} "
              f"{r['kepler_solves_per_s']:>16.3e}")
    speedup = rows[0]["kick_steps_per_s"] / rows[1]["kick_steps_per_s"]
    print(f"numba speedup on the kick loop: {speedup:.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
