"""Field-free 1D hydrogen eigenbasis on a mapped collocation grid.

The half-line Coulomb problem H0 = p^2/2 - 1/q with Dirichlet walls at q = 0
and q = q_max is discretised on the quadratically mapped grid q = x^2 (dense
near the nucleus, sparse at large q) using a sine-DVR second derivative in x.
The mapped kinetic operator is symmetrised,

    T = -1/4 (J^-2 d2 + d2 J^-2) + (7/8) J'^2/J^4 - (1/4) J''/J^3,

which is exact for the similarity-transformed wavefunction phi = psi sqrt(J)
with Jacobian J = dq/dx.  Eigenvectors are returned in the phi representation,
where they are orthonormal in plain l2 and every local operator (kick, mask,
dipole) is diagonal on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh

__all__ = ["EnergyBasis", "BasisError", "build_basis", "initial_state_index"]


class BasisError(RuntimeError):
    """Raised when the discretisation fails its spectral-accuracy contract."""


@dataclass
class EnergyBasis:
    """Eigenbasis of H0 on the box, plus the grid machinery to build operators."""

    q_max: float
    N: int                      # number of retained eigenstates
    n_grid: int
    grid: np.ndarray            # q collocation points, shape (n_grid,)
    jac: np.ndarray             # dq/dx at the grid points
    dx: float
    energies: np.ndarray        # ascending, shape (N,)
    states: np.ndarray          # phi-representation, shape (n_grid, N), l2-orthonormal
    n_bound: int
    position_matrix: np.ndarray  # <n| q |m>, shape (N, N)

    def bound_slice(self) -> slice:
        return slice(0, self.n_bound)

    def n_eff(self) -> np.ndarray:
        """Effective quantum number 1/sqrt(-2E) of the bound states."""
        return 1.0 / np.sqrt(-2.0 * self.energies[: self.n_bound])

    def grid_to_basis(self, diag_values: np.ndarray) -> np.ndarray:
        """Matrix of a grid-diagonal operator in the energy basis."""
        return self.states.T @ (diag_values[:, None] * self.states)

    def wavefunction(self, coeffs: np.ndarray) -> np.ndarray:
        """psi(q) on the grid for a coefficient vector (integration weight J dx)."""
        phi = self.states @ coeffs
        return phi / np.sqrt(self.jac * self.dx)


def _grid_operators(q_max: float, n_grid: int):
    """Mapped grid, Jacobian and the symmetric kinetic matrix."""
    x_max = np.sqrt(q_max)
    dx = x_max / (n_grid + 1)
    x = dx * np.arange(1, n_grid + 1)
    q = x**2
    jac = 2.0 * x
    i = np.arange(1, n_grid + 1)
    # orthonormal DST-I: exact second derivative for Dirichlet boundaries
    U = np.sqrt(2.0 / (n_grid + 1)) * np.sin(np.pi * np.outer(i, i) / (n_grid + 1))
    k = np.pi * i / x_max
    D2 = (U * (-(k**2))) @ U.T
    W2 = 1.0 / jac**2
    V_map = (7.0 / 8.0) * 4.0 / jac**4          # J' = 2, J'' = 0
    T = -0.25 * (W2[:, None] * D2 + D2 * W2[None, :]) + np.diag(V_map)
    return x, q, jac, dx, T


def kinetic_matrix(q_max: float, n_grid: int) -> tuple[np.ndarray, np.ndarray, np.ndarray, float]:
    """(q grid, Jacobian, kinetic matrix, dx) for external Hamiltonian builds."""
    _, q, jac, dx, T = _grid_operators(q_max, n_grid)
    return q, jac, T, dx


def build_basis(q_max: float, n_grid: int = 1600, E_cut: float | None = None,
                n_check: int = 5, spectral_tol: float = 1e-4) -> EnergyBasis:
    """Diagonalise H0 on the box and retain eigenpairs with E < E_cut.

    Raises :class:`BasisError` when the lowest ``n_check`` levels miss the
    Rydberg values -1/(2 n^2) by more than ``spectral_tol`` (relative).
    """
    if q_max <= 0:
        raise ValueError("q_max must be positive")
    if n_grid < 16:
        raise ValueError("basis dimension too small (n_grid >= 16)")
    _, q, jac, dx, T = _grid_operators(q_max, n_grid)
    H = T + np.diag(-1.0 / q)
    energies, vectors = eigh(H)
    n_bound_total = int(np.sum(energies < 0.0))
    check = min(n_check, n_bound_total)
    n_ref = np.arange(1, check + 1)
    exact = -0.5 / n_ref**2
    rel = np.abs((energies[:check] - exact) / exact)
    if rel.size and rel.max() > spectral_tol:
        worst = int(np.argmax(rel)) + 1
        raise BasisError(
            f"spectral tolerance not met: level n={worst} deviates by "
            f"{rel.max():.2e} (> {spectral_tol:.0e}); increase n_grid or shrink q_max"
        )
    if E_cut is not None:
        keep = int(np.searchsorted(energies, E_cut))
        keep = max(keep, n_bound_total)     # never drop bound states
    else:
        keep = n_grid
    energies = np.ascontiguousarray(energies[:keep])
    vectors = np.ascontiguousarray(vectors[:, :keep])
    position = vectors.T @ (q[:, None] * vectors)
    return EnergyBasis(
        q_max=q_max, N=keep, n_grid=n_grid, grid=q, jac=jac, dx=dx,
        energies=energies, states=vectors, n_bound=n_bound_total,
        position_matrix=position,
    )


def initial_state_index(basis: EnergyBasis, n_i: int) -> int:
    """Index of the bound eigenstate with principal quantum number n_i."""
    if n_i < 1 or n_i > basis.n_bound:
        raise ValueError(
            f"n_i={n_i} outside the bound spectrum of the box (n_bound={basis.n_bound})"
        )
    return n_i - 1
