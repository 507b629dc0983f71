"""Conservation and dissipation checks over a recorded time series."""
import logging
from typing import Dict, List, Union

import numpy as np
from pydantic import BaseModel, Field

from cavity_constants import ENERGY_STEP_TOLERANCE, MOMENTUM_DRIFT_TOLERANCE
from coupling.time_series import TimeSeries

logger = logging.getLogger(__name__)

INTEGRATED_ENERGY_TOLERANCE = 1e-2


class Violation(BaseModel):
    index: int
    t: float
    magnitude: float


class InvariantReport(BaseModel):
    name: str
    passed: bool
    tolerance: float
    max_value: float
    violations: List[Violation] = Field(default_factory=list)
    details: Dict[str, Union[bool, float]] = Field(default_factory=dict)


def _violations(t: np.ndarray, excess: np.ndarray, threshold: float, offset: int = 0) -> List[Violation]:
    flagged = np.flatnonzero(excess > threshold)
    return [Violation(index=int(i + offset), t=float(t[i + offset]), magnitude=float(excess[i])) for i in flagged]


def check_energy_inequality(series: TimeSeries, tolerance: float = ENERGY_STEP_TOLERANCE,
                            integrated_tolerance: float = INTEGRATED_ENERGY_TOLERANCE) -> InvariantReport:
    """
    Per step: ℰ(t_n) ≤ ℰ(t_{n−1}) + tolerance·ℰ(0).
    Integrated (reported in details, not part of `passed`):
        2ℰ(t) + 2μ∫₀ᵗ‖∇v‖² ≤ 2ℰ(0), trapezoid rule in time.
    """
    t = series.t
    energy = series.column('E_total')
    scale = max(abs(energy[0]), np.finfo(float).tiny)
    increase = np.diff(energy)
    violations = _violations(t, increase, tolerance * scale, offset=1)

    dissipation = series.viscosity * series.column('gradv_l2') ** 2
    dissipated = np.concatenate([[0.0], np.cumsum(0.5 * np.diff(t) * (dissipation[1:] + dissipation[:-1]))])
    integrated_excess = (2 * energy + 2 * dissipated - 2 * energy[0]) / (2 * scale)

    max_increase = float(increase.max() / scale) if len(increase) else 0.0
    for violation in violations:
        logger.warning(f'Energy increased by {violation.magnitude:.3e} at step {violation.index} (t={violation.t:.6g})')
    return InvariantReport(
        name='energy_inequality',
        passed=not violations,
        tolerance=tolerance,
        max_value=max_increase,
        violations=violations,
        details={
            'initial_energy': float(energy[0]),
            'final_energy': float(energy[-1]),
            'max_integrated_excess': float(integrated_excess.max()),
            'integrated_passed': bool(integrated_excess.max() <= integrated_tolerance),
        },
    )


def momentum_magnitude(series: TimeSeries) -> np.ndarray:
    """|I·ω∞| = sqrt(A²p² + B²q² + C²r²) per record."""
    return np.linalg.norm(series.momentum, axis=1)


def check_momentum_conservation(series: TimeSeries, tolerance: float = MOMENTUM_DRIFT_TOLERANCE) -> InvariantReport:
    magnitude = momentum_magnitude(series)
    reference = magnitude[0]
    if reference > 0:
        drift = np.abs(magnitude - reference) / reference
    else:
        drift = np.abs(magnitude)
    violations = _violations(series.t, drift, tolerance)
    return InvariantReport(
        name='momentum_conservation',
        passed=not violations,
        tolerance=tolerance,
        max_value=float(drift.max()),
        violations=violations,
        details={'initial_magnitude': float(reference), 'final_magnitude': float(magnitude[-1])},
    )


def momentum_balance_residual(series: TimeSeries) -> np.ndarray:
    """
    Central-difference residual of dA/dt = A × ω at interior records, where A
    is the total angular momentum; frame-independent for proper rotations.
    """
    t = series.t
    if len(t) < 3:
        raise ValueError('Momentum balance residual needs at least three records')
    momentum = series.momentum
    rate = (momentum[2:] - momentum[:-2]) / (t[2:] - t[:-2])[:, None]
    residual = rate - np.cross(momentum[1:-1], series.omega[1:-1])
    return np.linalg.norm(residual, axis=1)
