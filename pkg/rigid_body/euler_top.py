"""Euler top: right-hand side, implicit midpoint integrator and the symmetric-top closed form."""
import logging
from typing import Callable, Optional

import numpy as np

from cavity_errors import NonlinearSolveError

logger = logging.getLogger(__name__)

TorqueFunction = Callable[[np.ndarray], np.ndarray]


def _matrix(inertia) -> np.ndarray:
    return np.asarray(getattr(inertia, 'matrix', inertia), dtype=float).reshape(3, 3)


def _skew(v: np.ndarray) -> np.ndarray:
    return np.array([[0.0, -v[2], v[1]], [v[2], 0.0, -v[0]], [-v[1], v[0], 0.0]])


def euler_rhs(inertia, omega) -> np.ndarray:
    """ω̇ = −I⁻¹(ω × Iω)."""
    matrix = _matrix(inertia)
    omega = np.asarray(omega, dtype=float)
    return -np.linalg.solve(matrix, np.cross(omega, matrix @ omega))


def midpoint_step(inertia, omega, torque_fn: Optional[TorqueFunction], time_step: float,
                  tolerance: float = 1e-12, max_newton: int = 20, max_fixed_point: int = 50) -> np.ndarray:
    """
    One step of I(ω⁺ − ω)/τ + m × Im = T(m), m = (ω⁺ + ω)/2.

    Newton on the gyroscopic part with the torque lagged in the Jacobian;
    falls back to fixed-point iteration if Newton stalls.
    """
    if time_step <= 0:
        raise ValueError(f'Time step must be positive, got {time_step}')
    matrix = _matrix(inertia)
    omega = np.asarray(omega, dtype=float)
    torque = torque_fn if torque_fn is not None else (lambda _m: np.zeros(3))

    def residual(y):
        mid = 0.5 * (y + omega)
        return matrix @ (y - omega) / time_step + np.cross(mid, matrix @ mid) - torque(mid)

    y = omega + time_step * euler_rhs(matrix, omega)
    for _ in range(max_newton):
        mid = 0.5 * (y + omega)
        jacobian = matrix / time_step + 0.5 * (_skew(mid) @ matrix - _skew(matrix @ mid))
        delta = np.linalg.solve(jacobian, -residual(y))
        y = y + delta
        if np.linalg.norm(delta) <= tolerance * max(1.0, np.linalg.norm(y)):
            return y

    logger.debug('Midpoint Newton did not converge, falling back to fixed-point iteration')
    y = omega.copy()
    for iteration in range(1, max_fixed_point + 1):
        mid = 0.5 * (y + omega)
        updated = omega + time_step * np.linalg.solve(matrix, torque(mid) - np.cross(mid, matrix @ mid))
        if np.linalg.norm(updated - y) <= tolerance * max(1.0, np.linalg.norm(updated)):
            return updated
        y = updated
    raise NonlinearSolveError('Implicit midpoint step did not converge', max_newton + max_fixed_point)


def integrate(inertia, omega0, time_step: float, steps: int, torque_fn: Optional[TorqueFunction] = None) -> np.ndarray:
    """Trajectory of `steps` midpoint steps, shape (steps + 1, 3)."""
    trajectory = np.empty((steps + 1, 3))
    trajectory[0] = omega0
    for n in range(steps):
        trajectory[n + 1] = midpoint_step(inertia, trajectory[n], torque_fn, time_step)
    return trajectory


def symmetric_top_exact(a: float, c: float, omega0, t) -> np.ndarray:
    """
    Free symmetric top A = B: r is constant and p + iq rotates with
    Ω = (C − A) r0 / A, (p + iq)(t) = (p0 + iq0) exp(iΩt).
    """
    p0, q0, r0 = np.asarray(omega0, dtype=float)
    t = np.asarray(t, dtype=float)
    precession = (c - a) * r0 / a
    transverse = (p0 + 1j * q0) * np.exp(1j * precession * t)
    return np.stack([transverse.real, transverse.imag, np.full_like(t, r0)], axis=-1)


def quadratic_invariants(inertia, omega) -> np.ndarray:
    """(|Iω|², ω·Iω) for ω of shape (..., 3)."""
    matrix = _matrix(inertia)
    momentum = np.asarray(omega) @ matrix.T
    return np.stack([np.sum(momentum ** 2, axis=-1), np.sum(np.asarray(omega) * momentum, axis=-1)], axis=-1)
