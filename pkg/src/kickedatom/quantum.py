"""Quantum engine: one-period evolution operator, Floquet decomposition,
long-time propagation and bound-state observables.

The period-one operator is exp(-i H0 T/2) exp(i dp q) exp(-i H0 T/2) in the
field-free eigenbasis; the free half-period factors are diagonal there and the
kick is diagonal on the collocation grid.  An absorbing mask (applied three
times per period by default) removes outgoing flux and turns the quasi-energy
spectrum complex, which is what makes kick counts of 10^7 and beyond reachable
through the spectral form of U^K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eig, solve

from .basis import EnergyBasis, initial_state_index
from .series import ObservableSeries
from .units import SystemParams

__all__ = [
    "MaskPolicy", "QuantumState", "FloquetOperator", "FloquetDecomposition",
    "initial_state", "one_period_op", "floquet_decompose",
    "evolve_direct", "evolve_floquet",
    "survival_probability", "mean_n", "spectral_distribution",
    "one_kick_ionization_probability",
]


class UndefinedObservableError(ArithmeticError):
    """Observable requested for a state with no bound content."""


@dataclass(frozen=True)
class MaskPolicy:
    """Absorbing mask: 1 for q <= q_on, cos^exponent roll-off to q_max."""

    q_on: float
    exponent: float = 0.125
    applications_per_period: int = 3

    @classmethod
    def default(cls, q_max: float) -> "MaskPolicy":
        return cls(q_on=0.8 * q_max)

    def values(self, q: np.ndarray, q_max: float) -> np.ndarray:
        if not 0.0 < self.q_on < q_max:
            raise ValueError(f"q_on={self.q_on} outside (0, q_max={q_max})")
        m = np.ones_like(q)
        outer = q > self.q_on
        arg = 0.5 * np.pi * (q[outer] - self.q_on) / (q_max - self.q_on)
        m[outer] = np.cos(arg) ** self.exponent
        # keep the mask strictly positive: Dirichlet wall handles the endpoint
        return np.maximum(m, 1e-300)


@dataclass
class QuantumState:
    """Coefficient vector over an :class:`EnergyBasis`."""

    coeffs: np.ndarray
    time_kicks: int = 0

    def norm_sq(self) -> float:
        return float(np.vdot(self.coeffs, self.coeffs).real)


def initial_state(basis: EnergyBasis, n_i: int) -> QuantumState:
    """Unit vector on the eigenstate with principal quantum number n_i."""
    idx = initial_state_index(basis, n_i)
    c = np.zeros(basis.N, dtype=complex)
    c[idx] = 1.0
    return QuantumState(coeffs=c, time_kicks=0)


@dataclass
class FloquetOperator:
    """Dense one-period evolution operator in the energy basis."""

    U: np.ndarray
    basis: EnergyBasis
    params: SystemParams
    mask: MaskPolicy | None


def one_period_op(basis: EnergyBasis, params: SystemParams,
                  mask: MaskPolicy | None = None) -> FloquetOperator:
    """Assemble U(T) with the mask interleaved after each factor.

    Application order (right to left): half-period propagation, mask, kick,
    mask, half-period propagation, mask.
    """
    half_phase = np.exp(-0.5j * basis.energies * params.T)
    kick_grid = np.exp(1j * params.dp * basis.grid)
    K = basis.grid_to_basis(kick_grid)
    if mask is None:
        U = half_phase[:, None] * K * half_phase[None, :]
    else:
        M = basis.grid_to_basis(mask.values(basis.grid, basis.q_max).astype(complex))
        U = M @ (half_phase[:, None] * (M @ K @ (M * half_phase[None, :])))
    return FloquetOperator(U=U, basis=basis, params=params, mask=mask)


@dataclass
class FloquetDecomposition:
    """Eigen-decomposition of U(T), bound to an initial state when overlaps set."""

    quasi_energies: np.ndarray    # complex, E = i ln(lambda) / T
    eigenvalues: np.ndarray       # lambda = exp(-i T E)
    right_states: np.ndarray      # columns
    overlaps: np.ndarray | None   # d_j such that sum_j d_j |phi_j> = psi(0)
    T: float
    basis: EnergyBasis = field(repr=False, default=None)

    def lifetimes(self, unimodular_tol: float = 1e-13) -> np.ndarray:
        """Decay lifetime of each Floquet state in atomic-unit time.

        Eigenvalues whose magnitude is within ``unimodular_tol`` of 1 map to
        inf: a non-decaying operator is only unitary up to round-off in the
        eigensolver, and lifetimes derived from that round-off are noise.
        """
        mags = np.abs(self.eigenvalues)
        out = np.full(mags.shape, np.inf)
        decaying = mags < 1.0 - unimodular_tol
        out[decaying] = -self.T / (2.0 * np.log(mags[decaying]))
        return out


class EigensolverError(RuntimeError):
    pass


def floquet_decompose(op: FloquetOperator,
                      state: QuantumState | None = None) -> FloquetDecomposition:
    """Full (generally non-normal) eigendecomposition of U(T).

    Overlaps are obtained by solving the linear system over right eigenvectors,
    which is exact even when the mask destroys orthogonality.  Eigenpairs are
    ordered by descending |overlap| (descending |lambda| when no state given),
    making reconstruction order deterministic under degeneracies.
    """
    try:
        lam, V = eig(op.U)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise EigensolverError(f"Floquet eigensolver failed: {exc}") from exc
    residual = np.linalg.norm(op.U @ V - V * lam[None, :], ord="fro")
    if not np.isfinite(residual) or residual > 1e-6 * max(1.0, np.linalg.norm(op.U)):
        raise EigensolverError(f"Floquet eigendecomposition residual too large: {residual:.2e}")
    d = None
    if state is not None:
        d = solve(V, state.coeffs)
        order = np.lexsort((-np.abs(d), np.round(lam.real, 12), np.round(lam.imag, 12)))
        lam, V, d = lam[order], V[:, order], d[order]
    else:
        order = np.argsort(-np.abs(lam), kind="stable")
        lam, V = lam[order], V[:, order]
    quasi = 1j * np.log(lam) / op.params.T
    return FloquetDecomposition(quasi_energies=quasi, eigenvalues=lam,
                                right_states=V, overlaps=d, T=op.params.T,
                                basis=op.basis)


def survival_probability(state: QuantumState, basis: EnergyBasis) -> float:
    """Norm fraction in bound (E < 0) box states."""
    c = state.coeffs[: basis.n_bound]
    return float(np.sum(np.abs(c) ** 2))


def mean_n(state: QuantumState, basis: EnergyBasis) -> float:
    """Bound-subspace expectation of 1/sqrt(-2 H0), normalised by P_sur."""
    w = np.abs(state.coeffs[: basis.n_bound]) ** 2
    p_sur = float(np.sum(w))
    if p_sur <= 0.0:
        raise UndefinedObservableError("mean_n undefined: no bound norm left")
    return float(np.sum(w * basis.n_eff()) / p_sur)


def spectral_distribution(state: QuantumState, basis: EnergyBasis) -> tuple[np.ndarray, np.ndarray]:
    """Non-normalised P(n): |c_n|^2 binned on integer n, summing to P_sur."""
    n_eff = basis.n_eff()
    w = np.abs(state.coeffs[: basis.n_bound]) ** 2
    n_max = max(1, int(np.ceil(n_eff.max()))) if n_eff.size else 1
    centers = np.arange(1, n_max + 1)
    edges = np.concatenate(([0.5], centers + 0.5))
    hist, _ = np.histogram(n_eff, bins=edges, weights=w)
    return centers, hist


def _observe(coeffs: np.ndarray, basis: EnergyBasis, n_bins: np.ndarray | None):
    w = np.abs(coeffs[: basis.n_bound]) ** 2
    p_sur = float(np.sum(w))
    norm = float(np.sum(np.abs(coeffs) ** 2))
    if p_sur > 0.0:
        nbar = float(np.sum(w * basis.n_eff()) / p_sur)
    else:
        nbar = math.nan
    hist = None
    if n_bins is not None:
        edges = np.concatenate(([0.5], n_bins + 0.5))
        hist, _ = np.histogram(basis.n_eff(), bins=edges, weights=w)
    return p_sur, nbar, norm, hist


def _assemble_series(basis, params, K_arr, coeff_iter, with_hist, engine="quantum"):
    n_bins = np.arange(1, basis.n_bound + 1) if with_hist else None
    P, nbar, norm, hists = [], [], [], []
    for coeffs in coeff_iter:
        p, nb, nr, h = _observe(coeffs, basis, n_bins)
        P.append(p); nbar.append(nb); norm.append(nr)
        if with_hist:
            hists.append(h)
    return ObservableSeries(
        K=np.asarray(K_arr, dtype=np.int64),
        t_au=np.asarray(K_arr, dtype=float) * params.T,
        P_sur=np.array(P), mean_n=np.array(nbar), norm=np.array(norm),
        engine=engine,
        n_bins=n_bins, hist=np.array(hists) if with_hist else None,
        meta={"n_i": params.n_i, "nu0": params.nu0, "F0av": params.F0av,
              "kick_sign": params.kick_sign},
    )


def evolve_direct(state: QuantumState, op: FloquetOperator, K: int,
                  checkpoints: np.ndarray | None = None,
                  with_hist: bool = False) -> ObservableSeries:
    """Apply U(T) K times, recording observables at the checkpoint kick counts."""
    if K < 0:
        raise ValueError("K must be non-negative")
    if checkpoints is None:
        checkpoints = np.arange(K + 1)
    checkpoints = np.asarray(checkpoints, dtype=np.int64)
    want = set(int(k) for k in checkpoints)

    def coeff_iter():
        psi = state.coeffs.copy()
        if 0 in want:
            yield psi
        for k in range(1, K + 1):
            psi = op.U @ psi
            if k in want:
                yield psi

    return _assemble_series(op.basis, op.params, np.sort(checkpoints),
                            coeff_iter(), with_hist)


def evolve_floquet(decomp: FloquetDecomposition, K_list: np.ndarray,
                   params: SystemParams, with_hist: bool = False) -> ObservableSeries:
    """Evaluate psi(K T) = sum_j d_j lambda_j^K |phi_j> for each K in K_list.

    Cost per K is independent of K; terms whose |lambda|^K underflows are
    dropped.
    """
    if decomp.overlaps is None:
        raise ValueError("decomposition has no initial-state overlaps")
    K_arr = np.sort(np.asarray(K_list, dtype=np.int64))
    log_lam = np.log(decomp.eigenvalues)

    def coeff_iter():
        for K in K_arr:
            exponent = K * log_lam
            weights = np.where(exponent.real < -700.0, 0.0, np.exp(exponent))
            yield decomp.right_states @ (decomp.overlaps * weights)

    return _assemble_series(decomp.basis, params, K_arr, coeff_iter(), with_hist)


def one_kick_ionization_probability(basis: EnergyBasis, n_i: int, dp: float) -> float:
    """Probability of E >= 0 after a single kick exp(i dp q) on eigenstate n_i."""
    idx = initial_state_index(basis, n_i)
    kick_grid = np.exp(1j * dp * basis.grid)
    amps = basis.states.T @ (kick_grid * basis.states[:, idx])
    return float(np.sum(np.abs(amps[basis.n_bound:]) ** 2))
