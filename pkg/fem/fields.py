from typing import Dict

import numpy as np

from fem.assembly import OperatorAssembler
from fem.saddle_point import solve_saddle_point


def relative_velocity(assembler: OperatorAssembler, u: np.ndarray, omega) -> np.ndarray:
    """v = u − omega × x."""
    return u - assembler.spaces.rigid_field(omega)


def norms(assembler: OperatorAssembler, u: np.ndarray, omega) -> Dict[str, float]:
    """L2 norms of v and ∇v for v = u − omega × x."""
    v = relative_velocity(assembler, u, omega)
    l2 = float(v @ (assembler.vector_mass @ v))
    grad = float(v @ (assembler.vector_stiffness @ v))
    return {'v_l2': np.sqrt(max(l2, 0.0)), 'gradv_l2': np.sqrt(max(grad, 0.0))}


def project_divergence_free(assembler: OperatorAssembler, v: np.ndarray) -> np.ndarray:
    """L2-closest field with zero trace that is orthogonal to every linear pressure."""
    spaces = assembler.spaces
    mass = assembler.vector_mass
    dofs = spaces.boundary_dofs
    solution = solve_saddle_point(mass, assembler.divergence, assembler.pressure_mean, mass @ v, dofs, np.zeros(len(dofs)))
    return solution.u


def angular_moment(assembler: OperatorAssembler, v: np.ndarray) -> np.ndarray:
    """∫ x × v, exact for quadratic fields (tested against the rigid fields e_i × x)."""
    basis = assembler.spaces.rigid_basis
    return basis @ (assembler.vector_mass @ v)
