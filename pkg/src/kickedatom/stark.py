"""Stark Hamiltonian diagonalisation, golden-rule harmonic rates and the
delocalization time.

The average field of a unidirectional kick train tilts the Coulomb potential;
every harmonic m of the kick train with energy m * 2pi/T large enough to lift
the deepest bound component into the tilted continuum contributes an
ionization rate Gamma_m = 2 pi rho(E_m) |F z(1, E_m)|^2.  The density of
states comes from local level spacings of the box spectrum, which makes the
physical rate independent of the box size (|z|^2 scales inversely with rho).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

from .basis import EnergyBasis, kinetic_matrix
from .quantum import FloquetDecomposition
from .units import SystemParams, thresholds

__all__ = [
    "StarkSpectrum", "RateTable", "diagonalize_stark", "golden_rule_rates",
    "floquet_lifetimes",
]


@dataclass
class StarkSpectrum:
    """Box spectrum of H0 + q F with dipole couplings to the anchor state."""

    Fav: float
    q_max: float
    energies: np.ndarray
    dipole_to_anchor: np.ndarray   # <anchor| q |j> for every eigenstate j
    anchor_index: int
    anchor_overlap: float          # |<anchor | field-free ground>|
    continuum_edge: float          # barrier top of the tilted potential


def diagonalize_stark(basis: EnergyBasis, Fav: float) -> StarkSpectrum:
    """Diagonalise the Stark Hamiltonian on the same mapped grid as `basis`.

    The anchor is the Stark eigenstate with the largest overlap with the
    field-free ground state (computed, not assumed to be the lowest level).
    """
    q, jac, T, dx = kinetic_matrix(basis.q_max, basis.n_grid)
    H = T + np.diag(-1.0 / q + Fav * q)
    energies, vectors = eigh(H)
    ground = basis.states[:, 0]
    overlaps = np.abs(vectors.T @ ground)
    anchor = int(np.argmax(overlaps))
    dip = vectors.T @ (q * vectors[:, anchor])
    edge = thresholds_edge(Fav)
    return StarkSpectrum(Fav=Fav, q_max=basis.q_max, energies=energies,
                         dipole_to_anchor=dip, anchor_index=anchor,
                         anchor_overlap=float(overlaps[anchor]),
                         continuum_edge=edge)


def thresholds_edge(Fav: float) -> float:
    """Barrier top of -1/q + Fav q (0 for a field-free potential)."""
    Fmag = abs(Fav)
    if Fmag == 0.0:
        return 0.0
    return -2.0 * math.sqrt(Fmag)


def density_of_states(spectrum: StarkSpectrum, E: float, window: int = 3) -> float:
    """Inverse local level spacing, averaged over `window` spacings around E."""
    e = spectrum.energies
    j = int(np.searchsorted(e, E))
    lo = max(1, j - window)
    hi = min(e.size - 1, j + window)
    if hi <= lo:
        raise ValueError(f"energy {E} outside the usable spectrum")
    spacing = (e[hi] - e[lo - 1]) / (hi - lo + 1)
    return 1.0 / spacing


@dataclass
class RateTable:
    """Per-harmonic golden-rule ionization rates and the resulting tau_D."""

    m: np.ndarray          # harmonic indices
    E_m: np.ndarray        # target energies -1/2 + m * (2pi/T), a.u.
    gamma_m: np.ndarray
    tau_D: float           # atomic-unit time; inf when nothing contributes
    tau_D_kicks: float     # tau_D / T

    @property
    def total_rate(self) -> float:
        return float(np.sum(self.gamma_m))


def golden_rule_rates(spectrum: StarkSpectrum, params: SystemParams,
                      dos_window: int = 3, convergence_tol: float = 1e-3,
                      m_max_hard: int = 200000) -> RateTable:
    """Sum Gamma_m = 2 pi rho(E_m) |F z(1, E_m)|^2 over contributing harmonics.

    Only harmonics with E_m above the barrier of the tilted potential (and the
    anchor energy) contribute.  |z|^2 rho, the box-independent combination, is
    interpolated between neighbouring levels at each E_m.  The sum stops once
    the running total has converged to ``convergence_tol`` (relative).
    """
    omega = params.photon_energy            # 2 pi / T
    Fmag = abs(spectrum.Fav)
    e = spectrum.energies
    E_anchor = e[spectrum.anchor_index]
    edge = max(spectrum.continuum_edge, E_anchor + 0.5 * omega)
    # box-independent coupling density y(E) = rho(E) |z(E)|^2 per level
    y_levels = np.empty(e.size)
    for j in range(e.size):
        lo = max(1, j - dos_window)
        hi = min(e.size - 1, j + dos_window)
        spacing = (e[hi] - e[lo - 1]) / (hi - lo + 1)
        y_levels[j] = spectrum.dipole_to_anchor[j] ** 2 / spacing
    e_top = e[-dos_window - 1]

    m_start = max(1, int(math.ceil((edge - (-0.5)) / omega)))
    ms, Es, gs = [], [], []
    total = 0.0
    tail = 0.0
    tail_run = 0
    for m in range(m_start, m_max_hard + 1):
        E_m = -0.5 + m * omega
        if E_m >= e_top:
            break
        if E_m <= edge:
            continue
        y = float(np.interp(E_m, e, y_levels))
        g = 2.0 * math.pi * (Fmag ** 2) * y
        ms.append(m); Es.append(E_m); gs.append(g)
        total += g
        # convergence: a run of harmonics contributing < tol of the total
        tail += g
        tail_run += 1
        if tail_run >= 20:
            if total > 0.0 and tail < convergence_tol * total:
                break
            tail = 0.0
            tail_run = 0
    gamma = np.array(gs)
    total = float(np.sum(gamma))
    if total <= 0.0 or gamma.size == 0:
        tau = math.inf
    else:
        tau = 1.0 / total
    return RateTable(m=np.array(ms, dtype=np.int64), E_m=np.array(Es),
                     gamma_m=gamma, tau_D=tau,
                     tau_D_kicks=tau / params.T if math.isfinite(tau) else math.inf)


def floquet_lifetimes(decomp: FloquetDecomposition,
                      bound_floor: float = 1e-8) -> tuple[np.ndarray, np.ndarray]:
    """(lifetimes in a.u. time, <n> tag of each Floquet state), sorted by lifetime.

    Lifetime is -T / (2 ln|lambda|); exactly unimodular eigenvalues map to inf.
    The <n> tag is the bound-subspace mean quantum number of the right
    eigenvector; states whose bound content falls below ``bound_floor`` carry a
    NaN tag, since a mean computed from round-off-level weights is meaningless
    (and such near-unimodular continuum remnants would otherwise masquerade as
    extremely long-lived deep states).
    """
    basis = decomp.basis
    lifetimes = decomp.lifetimes()
    V = decomp.right_states
    w = np.abs(V[: basis.n_bound, :]) ** 2
    norm = (np.abs(V) ** 2).sum(axis=0)
    bound_norm = w.sum(axis=0)
    n_eff = basis.n_eff()
    with np.errstate(invalid="ignore", divide="ignore"):
        tags = (n_eff[:, None] * w).sum(axis=0) / bound_norm
    tags[bound_norm < bound_floor * norm] = np.nan
    order = np.argsort(-lifetimes, kind="stable")
    return lifetimes[order], tags[order]
