"""Quasi-resonant multi-photon ladder model.

Sequential one-photon excitation through the bound spectrum maps onto a real
symmetric matrix whose diagonal holds the (pseudo-random) detunings of the
quasi-resonant levels and whose off-diagonals decay as |k - k'|^(-5/3).  A
power-law band exponent >= 1 implies (weak) localization of the eigenstates,
which is the mechanism behind the suppression of ladder ionization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .units import SystemParams

__all__ = [
    "Ladder", "LadderMatrix", "LadderRangeError",
    "build_ladder", "assemble_matrix", "evolve_amplitudes",
    "localization_metrics", "coupling_element",
]

BAND_PREFACTOR = 0.411
BAND_EXPONENT = 5.0 / 3.0


class LadderRangeError(ValueError):
    def __init__(self, msg: str, k_max_admissible: int | None = None):
        super().__init__(msg)
        self.k_max_admissible = k_max_admissible


def _hydrogen_E(n) -> float:
    return -0.5 / float(n) ** 2


@dataclass
class Ladder:
    """Photon index range, quasi-resonant levels and their detunings."""

    k_range: np.ndarray       # photon indices, ascending, containing 0
    n_k: np.ndarray           # principal quantum number of each rung
    Delta_k: np.ndarray       # detunings, atomic units
    params: SystemParams

    @property
    def k0_index(self) -> int:
        return int(np.searchsorted(self.k_range, 0))


def admissible_k_range(params: SystemParams) -> tuple[int, int]:
    """Largest (k_min, k_max) keeping all target energies inside the bound spectrum."""
    omega = params.photon_energy
    E_i = _hydrogen_E(params.n_i)
    k_max = int(math.floor((-E_i) / omega)) - 1
    k_min = int(math.ceil((_hydrogen_E(1) - E_i) / omega))
    return k_min, k_max


def build_ladder(params: SystemParams, k_min: int | None = None,
                 k_max: int | None = None, max_rungs: int = 4001) -> Ladder:
    """Select, for each photon index k, the bound level nearest E_i + k*omega.

    Detunings use the exact hydrogen energies -1/(2 n^2); box artifacts have
    no place in an analytic model whose diagonal must be pseudo-random.
    The default range spans the bound spectrum, but the deep (k << 0) side,
    where many photon indices alias the same few tightly bound levels, is
    clipped so the matrix stays below ``max_rungs`` rungs.
    """
    lo, hi = admissible_k_range(params)
    if k_min is None:
        k_min = lo
    if k_max is None:
        k_max = hi
    if k_max - k_min + 1 > max_rungs:
        k_min = k_max - max_rungs + 1
    if k_max > hi or k_min < lo:
        raise LadderRangeError(
            f"photon index range [{k_min}, {k_max}] leaves the bound spectrum; "
            f"admissible range is [{lo}, {hi}]", k_max_admissible=hi)
    if k_min > 0 or k_max < 0:
        raise ValueError("k range must contain k = 0")
    omega = params.photon_energy
    E_i = _hydrogen_E(params.n_i)
    ks = np.arange(k_min, k_max + 1)
    targets = E_i + ks * omega
    # nearest level n: E_n = -1/(2n^2)  =>  n* = 1/sqrt(-2 E_target)
    n_star = 1.0 / np.sqrt(-2.0 * targets)
    n_lo = np.maximum(np.floor(n_star).astype(int), 1)
    n_hi = n_lo + 1
    E_lo = -0.5 / n_lo.astype(float) ** 2
    E_hi = -0.5 / n_hi.astype(float) ** 2
    pick_hi = np.abs(E_hi - targets) < np.abs(E_lo - targets)
    n_k = np.where(pick_hi, n_hi, n_lo)
    Delta = -0.5 / n_k.astype(float) ** 2 - E_i - ks * omega
    return Ladder(k_range=ks, n_k=n_k, Delta_k=Delta, params=params)


def coupling_element(F: float, n_k: float, n_kp: float, m: int, nu0: float) -> float:
    """Semiclassical bound-bound coupling 0.411 F / ((n_k n_k')^{3/2} (m nu0)^{5/3})."""
    if m == 0:
        return 0.0
    return BAND_PREFACTOR * F / ((n_k * n_kp) ** 1.5 * (m * nu0) ** BAND_EXPONENT)


@dataclass
class LadderMatrix:
    """Detunings on the diagonal, power-law banded couplings off it."""

    HJ: np.ndarray
    ladder: Ladder
    band_exponent: float      # fitted decay power of the normalised couplings

    def eigensystem(self):
        return eigh(self.HJ)


def assemble_matrix(ladder: Ladder, F: float) -> LadderMatrix:
    """Assemble H^J and fit the band-decay exponent from the off-diagonals."""
    n = ladder.k_range.size
    nk = ladder.n_k.astype(float)
    nu0 = ladder.params.nu0
    HJ = np.zeros((n, n))
    mm = np.abs(np.subtract.outer(np.arange(n), np.arange(n)))
    with np.errstate(divide="ignore"):
        off = BAND_PREFACTOR * F / (np.outer(nk, nk) ** 1.5 * (mm * nu0) ** BAND_EXPONENT)
    off[mm == 0] = 0.0
    HJ = off
    HJ[np.diag_indices(n)] = ladder.Delta_k
    # fit |V| * (n_k n_k')^{3/2} against m on the k0 row
    if F != 0.0 and n > 3:
        i0 = ladder.k0_index
        ms, vals = [], []
        for j in range(n):
            m = abs(j - i0)
            if m >= 1:
                ms.append(m)
                vals.append(abs(HJ[i0, j]) * (nk[i0] * nk[j]) ** 1.5)
        slope = np.polyfit(np.log(ms), np.log(vals), 1)[0]
        band_exponent = -slope
    else:
        band_exponent = math.nan
    return LadderMatrix(HJ=HJ, ladder=ladder, band_exponent=band_exponent)


class IntegratorError(RuntimeError):
    pass


def evolve_amplitudes(matrix: LadderMatrix, t_grid: np.ndarray) -> np.ndarray:
    """Solve i dc/dt = H^J c with c_k(0) = delta_{k,0} by spectral decomposition.

    Returns complex amplitudes of shape (len(t_grid), n_rungs); the Hermitian
    generator conserves the norm exactly (checked to 1e-8).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    w, V = matrix.eigensystem()
    c0 = np.zeros(matrix.HJ.shape[0])
    c0[matrix.ladder.k0_index] = 1.0
    a0 = V.T @ c0
    phases = np.exp(-1j * np.outer(t_grid, w))
    c_t = (phases * a0[None, :]) @ V.T
    norms = np.sum(np.abs(c_t) ** 2, axis=1)
    if np.max(np.abs(norms - 1.0)) > 1e-8:
        raise IntegratorError(f"norm drift {np.max(np.abs(norms - 1.0)):.2e}")
    return c_t


def localization_metrics(matrix: LadderMatrix) -> dict:
    """Participation ratios and exponential-envelope lengths of the eigenstates."""
    w, V = matrix.eigensystem()
    pr = 1.0 / np.sum(V**4, axis=0)
    i0 = matrix.ladder.k0_index
    k0_state = int(np.argmax(V[i0, :] ** 2))
    # envelope fit of the k0-dominated eigenstate: log|v| vs distance from peak
    v = np.abs(V[:, k0_state])
    peak = int(np.argmax(v))
    dist = np.abs(np.arange(v.size) - peak)
    good = (v > 1e-14) & (dist > 0)
    if np.count_nonzero(good) > 3:
        slope = np.polyfit(dist[good], np.log(v[good]), 1)[0]
        loc_length = -1.0 / slope if slope < 0 else math.inf
    else:
        loc_length = math.nan
    return {
        "participation_ratios": pr,
        "pr_mean": float(np.mean(pr)),
        "pr_max": float(np.max(pr)),
        "k0_state_index": k0_state,
        "k0_participation": float(pr[k0_state]),
        "k0_localization_length": float(loc_length),
        "eigenvalues": w,
    }
