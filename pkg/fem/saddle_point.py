"""Direct solution of the constrained velocity/pressure system."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from cavity_errors import SingularSystemError
from fem.assembly import OperatorAssembler
from fem.boundary import apply_boundary_condition


@dataclass
class SaddlePointSolution:
    u: np.ndarray
    p: np.ndarray
    multiplier: np.ndarray
    residual: float


def solve_saddle_point(momentum: sp.spmatrix, divergence: sp.spmatrix, mean: np.ndarray, rhs: np.ndarray,
                       dofs: np.ndarray, values: np.ndarray) -> SaddlePointSolution:
    """
    Solve [[A, Bᵀ, 0], [B, 0, m], [0, mᵀ, 0]] [u, p, λ] = [f, 0, 0] with u[dofs] = values.

    The multiplier row pins the pressure mean; λ vanishes for compatible data.
    """
    n_u, n_p = momentum.shape[0], divergence.shape[0]
    m = sp.csr_matrix(np.asarray(mean).reshape(-1, 1))
    system = sp.bmat([
        [momentum, divergence.T, None],
        [divergence, None, m],
        [None, m.T, None],
    ], format='csr')
    full_rhs = np.concatenate([rhs, np.zeros((n_p + 1,) + np.shape(rhs)[1:])])
    system, full_rhs = apply_boundary_condition(system, full_rhs, dofs, values)
    try:
        solution = spla.splu(system.tocsc()).solve(full_rhs)
    except RuntimeError as error:
        raise SingularSystemError(f'Saddle-point factorization failed: {error}') from error
    if not np.all(np.isfinite(solution)):
        raise SingularSystemError('Saddle-point solve produced non-finite values')
    residual = np.linalg.norm(system @ solution - full_rhs) / max(np.linalg.norm(full_rhs), np.finfo(float).tiny)
    return SaddlePointSolution(
        u=solution[:n_u],
        p=solution[n_u:n_u + n_p],
        multiplier=solution[-1],
        residual=float(residual),
    )


def inf_sup_constant(assembler: OperatorAssembler) -> float:
    """
    Discrete inf-sup constant: square root of the smallest eigenvalue of
    B K⁻¹ Bᵀ against the pressure mass, on interior velocity dofs and
    mean-free pressures.
    """
    spaces = assembler.spaces
    interior = np.setdiff1d(np.arange(spaces.n_velocity), spaces.boundary_dofs)
    stiffness = assembler.vector_stiffness[interior][:, interior].tocsc()
    divergence = assembler.divergence[:, interior]
    solved = spla.splu(stiffness).solve(divergence.T.toarray())
    schur = divergence @ solved
    basis = scipy.linalg.null_space(assembler.pressure_mean[None, :])
    reduced = basis.T @ schur @ basis
    mass = basis.T @ assembler.pressure_mass.toarray() @ basis
    smallest = scipy.linalg.eigh(0.5 * (reduced + reduced.T), mass, eigvals_only=True)[0]
    return float(np.sqrt(max(smallest, 0.0)))
