"""Scaled-unit bookkeeping for the kicked 1D Rydberg atom.

All other modules receive parameters through :class:`SystemParams`, so the
conversions between scaled quantities (subscript 0) and atomic units live in
exactly one place.  The scaling is built from the principal quantum number
``n_i`` of the initial state and leaves the classical dynamics invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

__all__ = [
    "ParameterError",
    "SystemParams",
    "RegimeThresholds",
    "derive_params",
    "thresholds",
]


class ParameterError(ValueError):
    """Raised when physical parameters are outside their allowed domain."""


@dataclass(frozen=True)
class SystemParams:
    """Field and atom parameters, stored redundantly in scaled and atomic units.

    ``F0av`` is a magnitude; ``kick_sign`` carries the direction of the
    momentum transfer (+1 pushes the electron away from the nucleus, the
    default studied throughout).
    """

    n_i: int
    nu0: float            # scaled kick frequency
    F0av: float           # |F_0^av|, scaled average field magnitude
    kick_sign: int = 1

    # derived, filled in __post_init__
    T0: float = field(init=False)       # scaled period
    T: float = field(init=False)        # period, atomic units
    dp0: float = field(init=False)      # scaled kick strength (magnitude)
    dp: float = field(init=False)       # signed kick strength, atomic units
    Fav: float = field(init=False)      # signed average field, atomic units
    E0_gamma: float = field(init=False)  # scaled one-photon energy

    def __post_init__(self):
        if self.n_i < 1 or self.n_i != int(self.n_i):
            raise ParameterError(f"n_i must be a positive integer, got {self.n_i}")
        if not self.nu0 > 0:
            raise ParameterError(f"nu0 must be positive, got {self.nu0}")
        if self.F0av < 0:
            raise ParameterError(f"F0av is a magnitude, got {self.F0av}")
        if self.kick_sign not in (-1, 1):
            raise ParameterError(f"kick_sign must be +1 or -1, got {self.kick_sign}")
        n_i = self.n_i
        object.__setattr__(self, "T0", 1.0 / self.nu0)
        object.__setattr__(self, "T", 2.0 * math.pi * n_i**3 * self.T0)
        dp0 = 2.0 * math.pi * self.F0av / self.nu0
        object.__setattr__(self, "dp0", dp0)
        object.__setattr__(self, "dp", self.kick_sign * dp0 / n_i)
        # positive kicks build up a negative (pulling-down) average field
        object.__setattr__(self, "Fav", -self.kick_sign * self.F0av / n_i**4)
        object.__setattr__(self, "E0_gamma", self.nu0 / n_i)

    @property
    def photon_energy(self) -> float:
        """One-photon energy 2*pi/T in atomic units."""
        return self.nu0 / self.n_i**3

    @property
    def E_i(self) -> float:
        """Energy of the initial state, atomic units."""
        return -0.5 / self.n_i**2


def derive_params(n_i: int, nu0: float, F0av: float, kick_sign: int = 1) -> SystemParams:
    """Build a consistent :class:`SystemParams` from scaled inputs."""
    return SystemParams(n_i=int(n_i), nu0=float(nu0), F0av=float(F0av),
                        kick_sign=int(kick_sign))


def _barrier(Fav: float) -> tuple[float, float]:
    """Barrier top of V(q) = -1/q + Fav*q for Fav < 0, found numerically.

    Returns (E_barrier, q_barrier).  The analytic saddle sits at
    q = 1/sqrt(|Fav|); the numerical search is kept so that downstream
    logic stays consistent with whatever potential is actually implemented.
    """
    Fmag = abs(Fav)
    if Fmag == 0.0:
        return 0.0, math.inf
    q_guess = 1.0 / math.sqrt(Fmag)
    res = minimize_scalar(lambda q: -(-1.0 / q - Fmag * q),
                          bracket=(0.5 * q_guess, q_guess, 2.0 * q_guess))
    return -res.fun, float(res.x)


@dataclass(frozen=True)
class RegimeThresholds:
    """Analytic one-kick regime borders for a given parameter set."""

    dp0_crit: float       # 1/sqrt(n_i)
    dp0_dipole: float     # 1/n_i
    m_c: float            # minimum harmonic index reaching the continuum
    E_barrier: float      # barrier top of the averaged potential, a.u.
    q_barrier: float      # barrier position, a.u.
    regime: str           # 'dipole' | 'sub-critical' | 'classical-correspondence'
    # -sqrt(2|Fav|): shortcut value sometimes quoted for the barrier top;
    # kept for reference only, never used downstream.
    E_barrier_estimate: float


def thresholds(params: SystemParams) -> RegimeThresholds:
    """Classify the kick strength against the dipole and critical borders."""
    n_i = params.n_i
    dp0_crit = 1.0 / math.sqrt(n_i)
    dp0_dipole = 1.0 / n_i
    m_c = n_i / (2.0 * params.nu0)
    E_b, q_b = _barrier(params.Fav)
    if params.dp0 < dp0_dipole:
        regime = "dipole"
    elif params.dp0 > dp0_crit:
        regime = "classical-correspondence"
    else:
        regime = "sub-critical"
    return RegimeThresholds(
        dp0_crit=dp0_crit,
        dp0_dipole=dp0_dipole,
        m_c=m_c,
        E_barrier=E_b,
        q_barrier=q_b,
        regime=regime,
        E_barrier_estimate=-math.sqrt(2.0 * abs(params.Fav)),
    )


def field_equivalent(dp0: float, nu0: float) -> float:
    """Scaled field magnitude that produces kick strength dp0 at frequency nu0."""
    return dp0 * nu0 / (2.0 * math.pi)
