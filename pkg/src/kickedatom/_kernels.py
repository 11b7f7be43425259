"""Hot numeric kernels for the classical engine.

The per-trajectory kick/Kepler loop dominates the runtime of every classical
run, so it is compiled with numba.  Setting the environment variable
``KICKEDATOM_DISABLE_NUMBA=1`` before import selects a pure-numpy/python
fallback with identical semantics (used for debugging and as a reference in
``benchmarks/``).

Conventions: 1D Coulomb H0 = p^2/2 - 1/q on q > 0, reflection at q = 0.
Bound motion is parametrised by the degenerate-Kepler anomaly
``q = a (1 - cos xi)`` with ``a = -1/(2E)`` and mean anomaly
``M = xi - sin xi``; unbound motion by the hyperbolic analogue.
"""

from __future__ import annotations

import math
import os

import numpy as np

NUMBA_DISABLED = os.environ.get("KICKEDATOM_DISABLE_NUMBA", "0") == "1"

if not NUMBA_DISABLED:
    try:
        from numba import njit, prange
    except ImportError:  # pragma: no cover
        NUMBA_DISABLED = True

if NUMBA_DISABLED:
    def njit(*args, **kwargs):
        def wrap(func):
            return func
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return wrap

    def prange(*args):
        return range(*args)

KEPLER_TOL = 1e-12
KEPLER_MAXIT = 100
TWO_PI = 2.0 * math.pi
# |E| below this is treated as parabolic to avoid overflow in a = 1/(2|E|)
E_PARABOLIC = 1e-30


@njit(cache=True)
def solve_kepler_radial(M):
    """Solve M = xi - sin(xi) for xi in [0, 2*pi), M in [0, 2*pi).

    Safeguarded Newton: the cube-root seed handles the e = 1 degeneracy at
    xi -> 0, a bisection bracket guarantees convergence elsewhere.
    """
    if M <= 0.0:
        return 0.0
    lo = 0.0
    hi = TWO_PI
    # series seed: M ~ xi^3/6 near 0, fall back to M + sin-corrected guess
    xi = (6.0 * M) ** (1.0 / 3.0)
    if xi > 1.0:
        xi = M if M < TWO_PI else TWO_PI - 1e-12
        if xi < 1.0:
            xi = 1.0
    for _ in range(KEPLER_MAXIT):
        f = xi - math.sin(xi) - M
        if f > 0.0:
            hi = xi
        else:
            lo = xi
        fp = 1.0 - math.cos(xi)
        if fp > 1e-14:
            step = f / fp
            xi_new = xi - step
        else:
            xi_new = 0.5 * (lo + hi)
        if xi_new <= lo or xi_new >= hi:
            xi_new = 0.5 * (lo + hi)
        if abs(xi_new - xi) < KEPLER_TOL:
            xi = xi_new
            break
        xi = xi_new
    return xi


@njit(cache=True)
def solve_kepler_hyperbolic(M):
    """Solve M = sinh(eta) - eta for eta >= 0, M >= 0."""
    if M <= 0.0:
        return 0.0
    # seed: small-M series M ~ eta^3/6; large-M asymptote eta ~ asinh(M + eta)
    if M < 1.0:
        eta = (6.0 * M) ** (1.0 / 3.0)
    else:
        eta = math.asinh(M)
        eta = math.asinh(M + eta)
    for _ in range(KEPLER_MAXIT):
        f = math.sinh(eta) - eta - M
        fp = math.cosh(eta) - 1.0
        if fp < 1e-14:
            eta = (6.0 * M) ** (1.0 / 3.0)
            break
        step = f / fp
        eta_new = eta - step
        if eta_new < 0.0:
            eta_new = 0.5 * eta
        if abs(eta_new - eta) < KEPLER_TOL * (1.0 + abs(eta)):
            eta = eta_new
            break
        eta = eta_new
    return eta


@njit(cache=True)
def advance_bound(q, p, E, dt):
    """Advance (q, p) at energy E < 0 by dt under H0, exactly."""
    a = -0.5 / E
    omega_inv = a * math.sqrt(a)      # period / (2 pi)
    c = 1.0 - q / a
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    xi = math.acos(c)
    if p < 0.0:
        xi = TWO_PI - xi
    M = xi - math.sin(xi) + dt / omega_inv
    M = M % TWO_PI
    xi = solve_kepler_radial(M)
    q_new = a * (1.0 - math.cos(xi))
    if q_new < 1e-14:
        q_new = 1e-14
    arg = 2.0 * (E + 1.0 / q_new)
    if arg < 0.0:
        arg = 0.0
    p_new = math.sqrt(arg)
    if math.sin(xi) < 0.0:
        p_new = -p_new
    return q_new, p_new


@njit(cache=True)
def advance_unbound(q, p, E, dt):
    """Advance (q, p) at energy E > 0 by dt, with reflection at q = 0."""
    a = 0.5 / E
    omega_inv = a * math.sqrt(a)
    c = 1.0 + q / a
    eta = math.acosh(c)
    M = math.sinh(eta) - eta
    if p < 0.0:
        M = -M
    M = M + dt / omega_inv
    sign = 1.0
    if M < 0.0:
        sign = -1.0
        M = -M
    eta = solve_kepler_hyperbolic(M)
    q_new = a * (math.cosh(eta) - 1.0)
    if q_new < 1e-14:
        q_new = 1e-14
    arg = 2.0 * (E + 1.0 / q_new)
    if arg < 0.0:
        arg = 0.0
    p_new = sign * math.sqrt(arg)
    return q_new, p_new


@njit(cache=True)
def advance_parabolic(q, p, dt):
    """Advance (q, p) at E = 0 by dt: q^(3/2) grows linearly in time."""
    rate = 1.5 * math.sqrt(2.0)
    s = q * math.sqrt(q)             # q^(3/2)
    if p >= 0.0:
        s_new = s + rate * dt
    else:
        t_hit = s / rate             # time to reach the nucleus
        if dt < t_hit:
            s_new = s - rate * dt
            q_new = s_new ** (2.0 / 3.0)
            if q_new < 1e-14:
                q_new = 1e-14
            return q_new, -math.sqrt(2.0 / q_new)
        s_new = rate * (dt - t_hit)
    q_new = s_new ** (2.0 / 3.0)
    if q_new < 1e-14:
        q_new = 1e-14
    return q_new, math.sqrt(2.0 / q_new)


@njit(cache=True)
def advance(q, p, E, dt):
    """Exact propagation under H0 for any energy sign."""
    if dt <= 0.0:
        return q, p
    if E < -E_PARABOLIC:
        return advance_bound(q, p, E, dt)
    if E > E_PARABOLIC:
        return advance_unbound(q, p, E, dt)
    return advance_parabolic(q, p, dt)


@njit(cache=True)
def _run_one(q, p, E, dp, T, n_kicks, checkpoint_kicks, out_E, traj, freeze_allowed):
    """Kick/propagate loop for one trajectory; records E after each checkpoint kick."""
    half = 0.5 * T
    ic = 0
    n_cp = checkpoint_kicks.shape[0]
    while ic < n_cp and checkpoint_kicks[ic] == 0:
        out_E[ic, traj] = E
        ic += 1
    for k in range(1, n_kicks + 1):
        dt = half if k == 1 else T
        q, p = advance(q, p, E, dt)
        p += dp
        E = 0.5 * p * p - 1.0 / q
        while ic < n_cp and checkpoint_kicks[ic] == k:
            out_E[ic, traj] = E
            ic += 1
        if ic >= n_cp:
            break
        # outgoing free electron under positive kicks never rebinds: fill the
        # remaining checkpoints with the (permanently positive) energy and stop
        if freeze_allowed and E > 0.0 and p > 0.0:
            while ic < n_cp:
                out_E[ic, traj] = E
                ic += 1
            break
    return q, p, E


if NUMBA_DISABLED:
    def run_ensemble(q, p, E, dp, T, n_kicks, checkpoint_kicks):
        n_traj = q.shape[0]
        out_E = np.empty((checkpoint_kicks.shape[0], n_traj))
        freeze = dp > 0.0
        q = q.copy(); p = p.copy(); E = E.copy()
        for i in range(n_traj):
            q[i], p[i], E[i] = _run_one(q[i], p[i], E[i], dp, T, n_kicks,
                                        checkpoint_kicks, out_E, i, freeze)
        return out_E, q, p, E
else:
    @njit(cache=True, parallel=True)
    def run_ensemble(q, p, E, dp, T, n_kicks, checkpoint_kicks):
        """Propagate an ensemble through n_kicks kicks.

        Returns (E at the requested checkpoints, final q, p, E).  Kicks act at
        t = k*T - T/2; because propagation conserves E, the energy recorded
        after the k-th kick equals the energy at observation time t = k*T.
        """
        n_traj = q.shape[0]
        out_E = np.empty((checkpoint_kicks.shape[0], n_traj))
        freeze = dp > 0.0
        q_f = q.copy(); p_f = p.copy(); E_f = E.copy()
        for i in prange(n_traj):
            q_f[i], p_f[i], E_f[i] = _run_one(q[i], p[i], E[i], dp, T, n_kicks,
                                              checkpoint_kicks, out_E, i, freeze)
        return out_E, q_f, p_f, E_f


@njit(cache=True)
def _lyap_one(q, p, E, dp, T, n_kicks, renorm_every, d0, qs, ps):
    """Shadow-trajectory log-growth sum for one pair; qs/ps scale the metric.

    Returns (sum of log growth factors, kicks survived).
    """
    half = 0.5 * T
    dq0 = d0 * qs / math.sqrt(2.0)
    dp0_ = d0 / ps / math.sqrt(2.0)
    q2 = q + dq0
    p2 = p + dp0_
    E2 = 0.5 * p2 * p2 - 1.0 / q2
    log_sum = 0.0
    survived = 0
    for k in range(1, n_kicks + 1):
        dt = half if k == 1 else T
        q, p = advance(q, p, E, dt)
        p += dp
        E = 0.5 * p * p - 1.0 / q
        q2, p2 = advance(q2, p2, E2, dt)
        p2 += dp
        E2 = 0.5 * p2 * p2 - 1.0 / q2
        if E >= 0.0 or E2 >= 0.0:
            break
        survived = k
        if k % renorm_every == 0:
            du = (q2 - q) / qs
            dv = (p2 - p) * ps
            d = math.sqrt(du * du + dv * dv)
            if d <= 0.0:
                break
            log_sum += math.log(d / d0)
            scale = d0 / d
            q2 = q + (q2 - q) * scale
            if q2 <= 0.0:
                q2 = 1e-14
            p2 = p + (p2 - p) * scale
            E2 = 0.5 * p2 * p2 - 1.0 / q2
    return log_sum, survived


if NUMBA_DISABLED:
    def lyapunov_ensemble(q, p, E, dp, T, n_kicks, renorm_every, d0, qs, ps):
        n = q.shape[0]
        log_sums = np.zeros(n)
        survived = np.zeros(n, dtype=np.int64)
        for i in range(n):
            log_sums[i], survived[i] = _lyap_one(q[i], p[i], E[i], dp, T,
                                                 n_kicks, renorm_every, d0, qs, ps)
        return log_sums, survived
else:
    @njit(cache=True, parallel=True)
    def lyapunov_ensemble(q, p, E, dp, T, n_kicks, renorm_every, d0, qs, ps):
        n = q.shape[0]
        log_sums = np.zeros(n)
        survived = np.zeros(n, dtype=np.int64)
        for i in prange(n):
            log_sums[i], survived[i] = _lyap_one(q[i], p[i], E[i], dp, T,
                                                 n_kicks, renorm_every, d0, qs, ps)
        return log_sums, survived


@njit(cache=True)
def solve_kepler_radial_array(M):
    out = np.empty_like(M)
    for i in range(M.shape[0]):
        out[i] = solve_kepler_radial(M[i])
    return out
