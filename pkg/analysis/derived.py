"""
Derived physical quantities of a coupled state.

With I the total inertia and L(v) = ρ∫x × v the angular moment of the
relative velocity:
    A  = I·ω + L(v)            total angular momentum
    ω∞ = I⁻¹·A                 final angular velocity
    a  = −I⁻¹·L(v)
    E  = ½(ρ‖v‖² − a·I·a)      liquid part of the energy
    ℰ  = E + ½ω∞·I·ω∞          total kinetic energy
"""
import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from fem.assembly import OperatorAssembler
from fem.fields import angular_moment, norms, project_divergence_free, relative_velocity
from rigid_body.inertia import InertiaTensor

logger = logging.getLogger(__name__)


@dataclass
class DerivedState:
    v: np.ndarray
    a: np.ndarray
    omega_infinity: np.ndarray
    angular_momentum: np.ndarray
    total_energy: float
    liquid_energy: float
    v_l2: float
    gradv_l2: float
    components: np.ndarray
    momentum_components: np.ndarray

    @property
    def cos_theta(self) -> float:
        """C·r/|I·ω∞|: cosine between e₃ and the angular momentum."""
        magnitude = np.linalg.norm(self.momentum_components)
        if magnitude == 0:
            return 0.0
        return float(self.momentum_components[2] / magnitude)


def derive(assembler: OperatorAssembler, u: np.ndarray, omega, inertia: InertiaTensor, rho: float) -> DerivedState:
    omega = np.asarray(omega, dtype=float)
    v = relative_velocity(assembler, u, omega)
    moment = rho * angular_moment(assembler, v)
    momentum = inertia.matrix @ omega + moment
    omega_infinity = inertia.solve(momentum)
    a = -inertia.solve(moment)
    field_norms = norms(assembler, u, omega)
    liquid_energy = 0.5 * (rho * field_norms['v_l2'] ** 2 - a @ inertia.matrix @ a)
    total_energy = liquid_energy + 0.5 * omega_infinity @ inertia.matrix @ omega_infinity
    return DerivedState(
        v=v,
        a=a,
        omega_infinity=omega_infinity,
        angular_momentum=momentum,
        total_energy=float(total_energy),
        liquid_energy=float(liquid_energy),
        v_l2=field_norms['v_l2'],
        gradv_l2=field_norms['gradv_l2'],
        components=inertia.to_frame(omega_infinity),
        momentum_components=inertia.to_frame(momentum),
    )


def random_solenoidal_fields(assembler: OperatorAssembler, n_samples: int, seed: Optional[int] = 0) -> np.ndarray:
    """(n_samples, n_velocity) random discretely divergence-free fields with zero trace."""
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((assembler.spaces.n_velocity, n_samples))
    return project_divergence_free(assembler, raw).T


def zero_moment_field(assembler: OperatorAssembler, seed: Optional[int] = 0) -> np.ndarray:
    """A nonzero divergence-free field whose angular moment ∫x × w vanishes."""
    fields = random_solenoidal_fields(assembler, 4, seed)
    moments = np.stack([angular_moment(assembler, w) for w in fields], axis=1)
    # Last right singular vector spans the kernel of the 3x4 moment matrix
    coefficients = np.linalg.svd(moments)[2][-1]
    return coefficients @ fields


def coercivity_check(assembler: OperatorAssembler, inertia: InertiaTensor, rho: float, n_samples: int = 100,
                     seed: Optional[int] = 0) -> Dict[str, float]:
    """
    Extremes over random solenoidal w of
        (‖w‖² − ρ(I⁻¹·∫x × w)·∫x × w) / ‖w‖².
    A positive minimum is the discrete form of the liquid energy being
    positive definite in v.
    """
    if n_samples < 1:
        raise ValueError(f'n_samples must be at least 1, got {n_samples}')
    quotients = []
    for w in random_solenoidal_fields(assembler, n_samples, seed):
        squared = float(w @ (assembler.vector_mass @ w))
        moment = angular_moment(assembler, w)
        quotients.append((squared - rho * inertia.solve(moment) @ moment) / squared)
    quotients = np.asarray(quotients)
    logger.debug(f'Coercivity quotients in [{quotients.min():.6f}, {quotients.max():.6f}]')
    return {'min_quotient': float(quotients.min()), 'max_quotient': float(quotients.max()), 'n_samples': n_samples}
