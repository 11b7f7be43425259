"""Engine-agnostic post-processing: power-law fits, break-time estimates,
logarithmic frequency averaging, extrema statistics and the variational
fractal-dimension estimator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

__all__ = [
    "PowerLawFit", "FrequencyScan", "FractalEstimate",
    "fit_power_law", "fit_mean_n_power_law", "tau_l_estimate",
    "log_average", "extrema_spacing", "fractal_dimension",
]


@dataclass
class PowerLawFit:
    """Least-squares power law v = (K/K0)^(-alpha) on log-log axes."""

    alpha: float
    K0: float
    b: float | None            # prefactor for <n_0> fits
    d: float | None            # alpha / b^2 when both pieces available
    fit_window: tuple[float, float]
    residual: float            # rms log-log residual


def fit_power_law(K: np.ndarray, values: np.ndarray,
                  window: tuple[float, float]) -> PowerLawFit:
    """Fit log(values) linearly in log(K) inside `window` (>= 10 points).

    alpha is minus the slope; K0 is where the fitted line crosses value 1.
    """
    K = np.asarray(K, dtype=float)
    values = np.asarray(values, dtype=float)
    m = (K >= window[0]) & (K <= window[1])
    if np.count_nonzero(m) < 10:
        raise ValueError("need at least 10 points in the fit window")
    if np.any(values[m] <= 0.0) or np.any(K[m] <= 0.0):
        raise ValueError("power-law fit requires positive K and values")
    lk = np.log(K[m])
    lv = np.log(values[m])
    slope, intercept = np.polyfit(lk, lv, 1)
    alpha = -slope
    K0 = math.exp(intercept / alpha) if alpha != 0.0 else math.nan
    resid = float(np.sqrt(np.mean((lv - (slope * lk + intercept)) ** 2)))
    return PowerLawFit(alpha=float(alpha), K0=float(K0), b=None, d=None,
                       fit_window=window, residual=resid)


def fit_mean_n_power_law(K: np.ndarray, n0: np.ndarray,
                         window: tuple[float, float],
                         K0: float, alpha: float) -> PowerLawFit:
    """Fit n0 = b (K/K0)^(-s) with K0 anchored to the survival fit.

    Returns the fit with b evaluated at the anchored K0 and d = alpha / b^2.
    """
    K = np.asarray(K, dtype=float)
    n0 = np.asarray(n0, dtype=float)
    m = (K >= window[0]) & (K <= window[1]) & np.isfinite(n0) & (n0 > 0)
    if np.count_nonzero(m) < 10:
        raise ValueError("need at least 10 points in the fit window")
    lk = np.log(K[m] / K0)
    lv = np.log(n0[m])
    slope, intercept = np.polyfit(lk, lv, 1)
    b = math.exp(intercept)
    resid = float(np.sqrt(np.mean((lv - (slope * lk + intercept)) ** 2)))
    return PowerLawFit(alpha=float(-slope), K0=float(K0), b=float(b),
                       d=float(alpha / b**2), fit_window=window, residual=resid)


def tau_l_estimate(params, mean_lyapunov: float) -> float:
    """Localization-time estimate ln(n_i) / <L> in kicks.

    ln(n_i) is ln(<q>/lambda_i) with <q> = n_i^2 and lambda_i = n_i; the
    Lyapunov exponent must be per kick.  Order of magnitude only.
    """
    if mean_lyapunov <= 0.0:
        raise ValueError("mean Lyapunov exponent must be positive")
    return math.log(params.n_i) / mean_lyapunov


@dataclass
class FrequencyScan:
    """P_sur (rows: K checkpoints, columns: nu0 grid) from one engine."""

    nu0_grid: np.ndarray
    K_list: np.ndarray
    values: np.ndarray          # shape (len(K_list), len(nu0_grid))
    engine_tag: str = "quantum"
    mean_n: np.ndarray | None = None

    def __post_init__(self):
        self.nu0_grid = np.asarray(self.nu0_grid, dtype=float)
        if not np.all(np.diff(self.nu0_grid) > 0):
            raise ValueError("nu0 grid must be strictly increasing")

    def row(self, K: int) -> np.ndarray:
        idx = int(np.searchsorted(self.K_list, K))
        if idx >= len(self.K_list) or self.K_list[idx] != K:
            raise KeyError(f"K={K} not in scan")
        return self.values[idx]


def log_average(scan: FrequencyScan,
                nu_window: tuple[float, float]) -> tuple[np.ndarray, int]:
    """Geometric mean of the scan values over a nu0 window, one entry per K.

    Returns (averaged series, number of zero values excluded).
    """
    m = (scan.nu0_grid >= nu_window[0]) & (scan.nu0_grid <= nu_window[1])
    if not np.any(m):
        raise ValueError("empty nu0 window")
    block = scan.values[:, m]
    out = np.empty(block.shape[0])
    excluded = 0
    for i, row in enumerate(block):
        pos = row > 0.0
        excluded += int(np.count_nonzero(~pos))
        out[i] = 10.0 ** np.mean(np.log10(row[pos])) if np.any(pos) else 0.0
    return out, excluded


def extrema_spacing(nu0_grid: np.ndarray, values: np.ndarray,
                    noise_floor: float = 1e-12) -> float:
    """Mean nu0 distance between adjacent strict local extrema.

    An extremum must differ from both neighbours by more than ``noise_floor``
    relative, which keeps floating-point plateaus from inflating the count.
    Returns NaN when fewer than two extrema exist.
    """
    v = np.asarray(values, dtype=float)
    x = np.asarray(nu0_grid, dtype=float)
    scale = np.maximum(np.abs(v), 1e-300)
    left = v[1:-1] - v[:-2]
    right = v[1:-1] - v[2:]
    thresh = noise_floor * scale[1:-1]
    is_max = (left > thresh) & (right > thresh)
    is_min = (left < -thresh) & (right < -thresh)
    idx = np.nonzero(is_max | is_min)[0] + 1
    if idx.size < 2:
        return math.nan
    return float(np.mean(np.diff(x[idx])))


@dataclass
class FractalEstimate:
    """Local dimension curve D(eps) from the variation method, plus its plateau."""

    resolutions: np.ndarray
    D_of_resolution: np.ndarray
    plateau_D: float
    plateau_decades: float
    plateau_ok: bool            # plateau at least one decade wide
    meta: dict = field(default_factory=dict)


def _variation_sums(signal: np.ndarray, step: float, half_widths: np.ndarray) -> np.ndarray:
    out = np.empty(half_widths.size)
    for i, w in enumerate(half_widths):
        size = 2 * int(w) + 1
        osc = maximum_filter1d(signal, size) - minimum_filter1d(signal, size)
        out[i] = np.sum(osc) * step
    return out


def fractal_dimension(values: np.ndarray, step: float = 1.0,
                      min_window: int = 1, max_window_frac: float = 0.1,
                      ladder_ratio: float = math.sqrt(2.0),
                      plateau_tol: float = 0.05) -> FractalEstimate:
    """Variational fractal dimension of a uniformly sampled signal.

    V(eps) sums the local oscillation (sup - inf over an eps neighbourhood)
    over the grid; D(eps) = 2 - d log V / d log eps by centred differences on
    a geometric eps ladder of ratio sqrt(2).  The plateau is the widest
    contiguous window where D varies by less than ``plateau_tol``; it is only
    trusted when at least one decade wide.
    """
    v = np.asarray(values, dtype=float)
    if v.ndim != 1 or v.size < 64:
        raise ValueError("need a 1D signal with at least 64 samples")
    max_w = max(min_window + 1, int(v.size * max_window_frac))
    widths = []
    w = float(min_window)
    while w <= max_w:
        iw = int(round(w))
        if not widths or iw > widths[-1]:
            widths.append(iw)
        w *= ladder_ratio
    widths = np.array(widths)
    eps = widths * step
    V = _variation_sums(v, step, widths)
    V = np.maximum(V, 1e-300)
    logV = np.log(V)
    loge = np.log(eps)
    dlogV = np.gradient(logV, loge)
    D = 2.0 - dlogV
    # widest contiguous window with spread < plateau_tol
    best = (0, 0)
    best_width = -1.0
    n = D.size
    for i in range(n):
        for j in range(i + 2, n + 1):
            if np.ptp(D[i:j]) >= plateau_tol:
                break
            width = loge[j - 1] - loge[i]
            if width > best_width:
                best_width = width
                best = (i, j)
    i, j = best
    if j > i:
        plateau_D = float(np.mean(D[i:j]))
        decades = float((loge[j - 1] - loge[i]) / math.log(10.0))
    else:
        plateau_D = float(np.median(D))
        decades = 0.0
    return FractalEstimate(
        resolutions=eps, D_of_resolution=D,
        plateau_D=plateau_D, plateau_decades=decades,
        plateau_ok=decades >= 1.0,
        meta={"n_points": v.size, "windows": widths},
    )
