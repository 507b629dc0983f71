"""Equilibrium time, asymptotic spin, power-law and decay fits over recorded runs."""
import logging
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.optimize
from pydantic import BaseModel

from cavity_constants import FINAL_WINDOW_FRACTION, STATIONARITY_TOLERANCE, TC_RATIO
from coupling.time_series import TimeSeries

logger = logging.getLogger(__name__)


def estimate_final_omega(series: TimeSeries, window: float = FINAL_WINDOW_FRACTION,
                         tolerance: float = STATIONARITY_TOLERANCE, check: bool = True) -> np.ndarray:
    """
    Mean angular velocity over the final `window` fraction of the run.

    With `check`, the window's standard deviation must stay below
    `tolerance` times the magnitude of the mean.
    """
    t = series.t
    start = t[-1] - window * (t[-1] - t[0])
    tail = series.omega[t >= start]
    mean = tail.mean(axis=0)
    spread = float(np.linalg.norm(tail.std(axis=0)))
    if check and spread > tolerance * np.linalg.norm(mean):
        raise ValueError(
            f'Angular velocity is not stationary over the final window: spread {spread:.3e}, '
            f'mean magnitude {np.linalg.norm(mean):.3e}'
        )
    return mean


def detect_tc(series: TimeSeries, omega_bar: Optional[Sequence[float]] = None, ratio: float = TC_RATIO) -> float:
    """
    First time at which |ω(t) − ω̄| / |ω(0) − ω̄| drops below `ratio`,
    interpolated linearly in the logarithm of the ratio between samples.
    """
    omega_bar = estimate_final_omega(series) if omega_bar is None else np.asarray(omega_bar, dtype=float)
    distance = np.linalg.norm(series.omega - omega_bar, axis=1)
    if distance[0] <= np.finfo(float).eps * max(np.linalg.norm(omega_bar), 1.0):
        raise ValueError('t_c undefined: the initial angular velocity already equals the final one')
    ratios = distance / distance[0]
    below = np.flatnonzero(ratios < ratio)
    if len(below) == 0:
        raise ValueError(f'Ratio never drops below {ratio}; run longer')
    n = below[0]
    t = series.t
    before, after = ratios[n - 1], ratios[n]
    if after > 0:
        weight = (np.log(ratio) - np.log(before)) / (np.log(after) - np.log(before))
    else:
        weight = (ratio - before) / (after - before)
    return float(t[n - 1] + weight * (t[n] - t[n - 1]))


def power_law_fit(points: Sequence[Tuple[float, float]], method: str = 'least_squares') -> float:
    """
    Exponent p of t_c = c·ν^p.

    `loglog` is the slope of the log-log regression; `least_squares` refines
    it by minimizing the residuals of t_c itself, seeded by the regression.
    """
    data = np.asarray(points, dtype=float)
    if data.ndim != 2 or len(data) < 2:
        raise ValueError(f'Power-law fit needs at least two points, got {len(data)}')
    if np.any(data <= 0):
        raise ValueError('Power-law fit needs positive viscosities and times')
    nu, tc = data[:, 0], data[:, 1]
    if len(np.unique(nu)) < 2:
        raise ValueError('Power-law fit needs at least two distinct viscosities')
    slope, intercept = np.polyfit(np.log(nu), np.log(tc), 1)
    if method == 'loglog':
        return float(slope)
    if method != 'least_squares':
        raise ValueError(f'Unknown fit method {method!r}')
    result = scipy.optimize.least_squares(
        lambda x: x[0] * nu ** x[1] - tc,
        x0=[np.exp(intercept), slope],
        xtol=1e-14, ftol=1e-14, gtol=1e-14,
    )
    logger.debug(f'Power-law fit: c={result.x[0]:.6g}, p={result.x[1]:.6g} (log-log seed {slope:.6g})')
    return float(result.x[1])


def decay_fit(series: TimeSeries, force: bool = False, rtol: float = 1e-6) -> Dict[str, float]:
    """
    Exponential fit ‖v(t)‖₂ ≈ c₁ e^{−λt} over the first decade of decay after the peak.

    Returns λ (`rate`), λ/μ (`c2`, when the viscosity is known), the
    prefactor and the R² of the log-linear fit. Only meaningful when all
    moments of inertia coincide; other series are refused unless forced.
    """
    moments = np.asarray(series.moments)
    if not force and moments.max() - moments.min() > rtol * moments.max():
        raise ValueError(f'Decay fit requires isotropic total inertia, got moments {tuple(moments)}')
    t = series.t
    v = series.column('v_l2')
    peak = int(np.argmax(v))
    if v[peak] <= 0:
        raise ValueError('Relative velocity is identically zero; nothing to fit')
    decade = np.flatnonzero(v[peak:] < 0.1 * v[peak])
    stop = peak + (decade[0] + 1 if len(decade) else len(v) - peak)
    window = slice(peak, stop)
    if stop - peak < 3 or np.any(v[window] <= 0):
        raise ValueError('Not enough positive samples after the peak for a decay fit')
    log_v = np.log(v[window])
    slope, intercept = np.polyfit(t[window], log_v, 1)
    fitted = slope * t[window] + intercept
    total = np.sum((log_v - log_v.mean()) ** 2)
    r_squared = 1.0 - np.sum((log_v - fitted) ** 2) / total if total > 0 else 1.0
    rate = -float(slope)
    return {
        'rate': rate,
        'c2': rate / series.viscosity if series.viscosity > 0 else rate,
        'prefactor': float(np.exp(intercept)),
        'r_squared': float(r_squared),
        't_start': float(t[peak]),
        't_stop': float(t[stop - 1]),
    }


class FlipOverReport(BaseModel):
    sign_r0: int
    sign_r_final: int
    cos_theta0: float
    cos_theta_final: float
    r0: float
    r_final: float
    degenerate: bool
    flipped: bool


def _sign(value: float, threshold: float) -> int:
    return 0 if abs(value) <= threshold else int(np.sign(value))


def flip_over_report(series: TimeSeries, omega_bar: Optional[Sequence[float]] = None,
                     rtol: float = 1e-6, atol: float = 1e-12) -> FlipOverReport:
    """Sign of the initial and final spin about e₃ and the tilt cos θ = C·r/|I·ω∞|."""
    omega = series.omega
    if omega_bar is None:
        omega_bar = estimate_final_omega(series, check=False)
    r_final = float(np.asarray(omega_bar)[2])
    threshold = max(atol, rtol * np.linalg.norm(omega[0]))
    momentum = series.momentum
    cos_theta = [m[2] / np.linalg.norm(m) if np.linalg.norm(m) > 0 else 0.0 for m in (momentum[0], momentum[-1])]
    sign_r0 = _sign(float(omega[0, 2]), threshold)
    sign_final = _sign(r_final, threshold)
    return FlipOverReport(
        sign_r0=sign_r0,
        sign_r_final=sign_final,
        cos_theta0=float(cos_theta[0]),
        cos_theta_final=float(cos_theta[1]),
        r0=float(omega[0, 2]),
        r_final=r_final,
        degenerate=sign_final == 0,
        flipped=sign_r0 * sign_final < 0,
    )
