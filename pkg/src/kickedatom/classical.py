"""Classical trajectory Monte Carlo for the 1D kicked Coulomb problem.

Propagation between kicks is the exact two-body solution (Kepler equation in
the degenerate e = 1 anomaly), so energy is conserved to machine precision and
the q -> 0 singularity costs nothing.  The per-trajectory kick loop lives in
:mod:`kickedatom._kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .series import ObservableSeries
from .units import SystemParams

__all__ = [
    "PhasePoint", "ClassicalEnsemble", "sample_microcanonical",
    "propagate_coulomb", "apply_kick", "run", "lyapunov_estimate",
    "one_kick_ionization_probability",
]


class InsufficientStatisticsError(RuntimeError):
    pass


@dataclass
class PhasePoint:
    """Single phase-space point; E is cached and kept consistent with (q, p)."""

    q: float
    p: float
    E: float

    @classmethod
    def from_qp(cls, q: float, p: float) -> "PhasePoint":
        return cls(q=q, p=p, E=0.5 * p * p - 1.0 / q)


@dataclass
class ClassicalEnsemble:
    """Microcanonical ensemble; ionized trajectories are flagged, never removed."""

    q: np.ndarray
    p: np.ndarray
    E: np.ndarray
    n_traj: int
    seed: int
    params: SystemParams

    @property
    def alive_mask(self) -> np.ndarray:
        return self.E < 0.0


def sample_microcanonical(params: SystemParams, n_traj: int, seed: int) -> ClassicalEnsemble:
    """Sample the orbit of energy -1/(2 n_i^2) uniformly in time.

    Mean anomaly uniform on [0, 2 pi), converted through q = n_i^2 (1 - cos xi)
    with M = xi - sin xi.  The Philox stream keyed by the master seed makes the
    ensemble a pure function of (seed, n_traj), independent of worker count.
    """
    if n_traj < 1:
        raise ValueError("n_traj must be >= 1")
    rng = np.random.Generator(np.random.Philox(key=seed))
    M = rng.random(n_traj) * 2.0 * math.pi
    xi = _kernels.solve_kepler_radial_array(M)
    a = float(params.n_i) ** 2
    E0 = -0.5 / a
    q = a * (1.0 - np.cos(xi))
    q = np.maximum(q, 1e-14)
    p_mag = np.sqrt(np.maximum(2.0 * (E0 + 1.0 / q), 0.0))
    p = np.where(np.sin(xi) >= 0.0, p_mag, -p_mag)
    E = np.full(n_traj, E0)
    return ClassicalEnsemble(q=q, p=p, E=E, n_traj=n_traj, seed=seed, params=params)


def propagate_coulomb(point: PhasePoint, dt: float) -> PhasePoint:
    """Advance a point under H0 for dt >= 0; exact, energy-conserving."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    q, p = _kernels.advance(point.q, point.p, point.E, dt)
    return PhasePoint(q=q, p=p, E=point.E)


def apply_kick(point: PhasePoint, dp: float) -> PhasePoint:
    """Impulsive momentum transfer: p -> p + dp at fixed q."""
    p = point.p + dp
    return PhasePoint(q=point.q, p=p, E=0.5 * p * p - 1.0 / point.q)


def _observables_from_energies(E_checkpoint: np.ndarray, n_traj: int,
                               n_bins: np.ndarray | None):
    bound = E_checkpoint < 0.0
    p_sur = float(np.count_nonzero(bound)) / n_traj
    if p_sur > 0.0:
        n_eff = 1.0 / np.sqrt(-2.0 * E_checkpoint[bound])
        nbar = float(np.mean(n_eff))
    else:
        n_eff = np.empty(0)
        nbar = math.nan
    hist = None
    if n_bins is not None:
        edges = np.concatenate(([0.5], n_bins + 0.5))
        hist, _ = np.histogram(n_eff, bins=edges)
        hist = hist / n_traj
    return p_sur, nbar, hist


def run(ensemble: ClassicalEnsemble, K: int, checkpoints: np.ndarray | None = None,
        with_hist: bool = False, n_max_hist: int | None = None) -> ObservableSeries:
    """Alternate exact Coulomb propagation and kicks for K kicks.

    Kicks act at t = k T - T/2; observables are recorded at t = k T for every
    checkpoint k.  P_sur is the fraction of trajectories with E < 0, <n>_cl the
    mean of 1/sqrt(-2E) over the bound ones.
    """
    params = ensemble.params
    if checkpoints is None:
        checkpoints = np.arange(K + 1)
    checkpoints = np.unique(np.asarray(checkpoints, dtype=np.int64))
    if checkpoints.size and (checkpoints[0] < 0 or checkpoints[-1] > K):
        raise ValueError("checkpoints must lie in [0, K]")
    E_cp, q_f, p_f, E_f = _kernels.run_ensemble(
        ensemble.q, ensemble.p, ensemble.E, params.dp, params.T, int(K), checkpoints)
    ensemble.q, ensemble.p, ensemble.E = q_f, p_f, E_f

    n_bins = None
    if with_hist:
        top = n_max_hist if n_max_hist is not None else 4 * params.n_i
        n_bins = np.arange(1, top + 1)
    P, nbar, hists = [], [], []
    for row in E_cp:
        p_s, nb, h = _observables_from_energies(row, ensemble.n_traj, n_bins)
        P.append(p_s); nbar.append(nb)
        if with_hist:
            hists.append(h)
    return ObservableSeries(
        K=checkpoints,
        t_au=checkpoints.astype(float) * params.T,
        P_sur=np.array(P), mean_n=np.array(nbar),
        norm=np.ones(checkpoints.size),
        engine="classical",
        n_bins=n_bins, hist=np.array(hists) if with_hist else None,
        meta={"n_i": params.n_i, "nu0": params.nu0, "F0av": params.F0av,
              "kick_sign": params.kick_sign, "n_traj": ensemble.n_traj,
              "seed": ensemble.seed},
    )


def lyapunov_estimate(params: SystemParams, n_traj: int, K_window: int,
                      seed: int = 0, renorm_every: int = 5,
                      d0: float = 1e-8, min_survivors: int = 10) -> float:
    """Mean finite-time Lyapunov exponent per kick, shadow-trajectory method.

    Separations are measured in the scaled metric (q/n_i^2, p*n_i) so the
    result is invariant under n_i rescaling at fixed (nu0, dp0).  Trajectories
    that ionize inside the window contribute their surviving stretch.
    """
    ens = sample_microcanonical(params, n_traj, seed)
    qs = float(params.n_i) ** 2
    ps = float(params.n_i)
    log_sums, survived = _kernels.lyapunov_ensemble(
        ens.q, ens.p, ens.E, params.dp, params.T, int(K_window),
        int(renorm_every), d0, qs, ps)
    ok = survived >= renorm_every
    if np.count_nonzero(ok) < min_survivors:
        raise InsufficientStatisticsError(
            f"only {np.count_nonzero(ok)} trajectories survived long enough "
            f"for a Lyapunov estimate (need {min_survivors})")
    rates = log_sums[ok] / survived[ok]
    return float(np.mean(rates))


def one_kick_ionization_probability(params: SystemParams, n_traj: int,
                                    seed: int = 0) -> float:
    """Fraction of the microcanonical ensemble with E >= 0 after one kick."""
    ens = sample_microcanonical(params, n_traj, seed)
    p_new = ens.p + params.dp
    E_new = 0.5 * p_new**2 - 1.0 / ens.q
    return float(np.count_nonzero(E_new >= 0.0)) / n_traj
