"""
Initial relative velocities.

`radial_profile` builds u₀ = f(s)ω₀ × x, i.e. v₀ = (f(s) − 1)ω₀ × x, where s is
a normalized radius equal to 1 on the cavity wall and f(s) = ½(1 − cos πs).
The field is then projected onto the discretely divergence-free fields with
zero trace. `zero_momentum` combines three such fields so that the total
angular momentum of body plus liquid vanishes.
"""
import logging
from typing import Callable, Sequence

import numpy as np

from cavity_errors import ConfigError
from fem.assembly import OperatorAssembler
from fem.fields import angular_moment, project_divergence_free

logger = logging.getLogger(__name__)

RadiusFunction = Callable[[np.ndarray], np.ndarray]


def radial_profile(s: np.ndarray) -> np.ndarray:
    """f(s) = ½(1 − cos πs), clipped to s in [0, 1]."""
    s = np.clip(np.asarray(s, dtype=float), 0.0, 1.0)
    return 0.5 * (1.0 - np.cos(np.pi * s))


def ellipsoid_radius(semi_axes: Sequence[float]) -> RadiusFunction:
    axes = np.asarray(semi_axes, dtype=float)
    return lambda x: np.sqrt(np.sum((x / axes) ** 2, axis=-1))


def cylinder_radius(radius: float, height: float) -> RadiusFunction:
    return lambda x: np.maximum(np.hypot(x[..., 0], x[..., 1]) / radius, 2.0 * np.abs(x[..., 2]) / height)


def bounding_radius(vertices: np.ndarray) -> RadiusFunction:
    """|x| / max |x|; used for meshes read from file."""
    scale = np.linalg.norm(vertices, axis=1).max()
    return lambda x: np.linalg.norm(x, axis=-1) / scale


def profile_field(assembler: OperatorAssembler, omega, radius: RadiusFunction) -> np.ndarray:
    """Unprojected (f − 1) omega × x."""
    omega = np.asarray(omega, dtype=float)
    return assembler.spaces.interpolate(
        lambda x: (radial_profile(radius(x)) - 1.0)[:, None] * np.cross(omega, x)
    )


def radial_profile_velocity(assembler: OperatorAssembler, omega, radius: RadiusFunction) -> np.ndarray:
    return project_divergence_free(assembler, profile_field(assembler, omega, radius))


def zero_momentum_velocity(assembler: OperatorAssembler, omega, inertia, rho: float,
                           radius: RadiusFunction) -> np.ndarray:
    """
    Relative velocity v₀ with ρ∫x × v₀ = −I·ω₀, so the total angular momentum
    I·ω₀ + ρ∫x × v₀ is zero.
    """
    matrix = np.asarray(getattr(inertia, 'matrix', inertia), dtype=float)
    fields = np.stack([radial_profile_velocity(assembler, axis, radius) for axis in np.eye(3)])
    moments = rho * np.stack([angular_moment(assembler, field) for field in fields], axis=1)
    target = -matrix @ np.asarray(omega, dtype=float)
    try:
        coefficients = np.linalg.solve(moments, target)
    except np.linalg.LinAlgError as error:
        raise ConfigError('Profile fields carry no independent angular momentum on this mesh') from error
    logger.debug(f'Zero-momentum coefficients {coefficients}')
    return coefficients @ fields
