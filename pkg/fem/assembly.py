"""
Sparse operator assembly for the liquid problem in the body frame.

Element arrays are computed for all tets at once and accumulated with
COO -> CSR summation. Blocks that do not depend on the iterate (mass,
viscous, divergence) are assembled once per mesh; convection and Coriolis are
rebuilt for every sub-iteration.
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.sparse as sp

from fem.function_spaces import FunctionSpaces, barycentric_gradients, p2_basis, p2_basis_gradients
from fem.quadrature import tet_rule

logger = logging.getLogger(__name__)

CONVECTION_FORMS = ('conservative', 'advective')


def cross_matrix(omega) -> np.ndarray:
    """[omega]_x, so that cross_matrix(w) @ v == w × v."""
    wx, wy, wz = np.asarray(omega, dtype=float)
    return np.array([[0.0, -wz, wy], [wz, 0.0, -wx], [-wy, wx, 0.0]])


@dataclass
class AssembledOperator:
    """
    Blocks of the discrete momentum/continuity system.

    M, S and N carry the density; K carries the dynamic viscosity. Velocity
    dofs are component-major, B maps velocity to pressure test functions and
    `mean` holds ∫ chi_k for the zero-mean pressure constraint.
    """
    M: sp.csr_matrix
    K: sp.csr_matrix
    N: sp.csr_matrix
    S: sp.csr_matrix
    B: sp.csr_matrix
    mean: np.ndarray

    def momentum_matrix(self, time_step: Optional[float]) -> sp.csr_matrix:
        """M/tau + S + N + K; a steady operator when time_step is None."""
        matrix = self.S + self.N + self.K
        if time_step is not None:
            matrix = matrix + self.M / time_step
        return matrix.tocsr()


class OperatorAssembler:
    """Holds the quadrature data of one mesh and assembles operators on demand."""

    def __init__(self, spaces: FunctionSpaces, convection: str = 'conservative'):
        if convection not in CONVECTION_FORMS:
            raise ValueError(f'Unknown convection form {convection!r}; expected one of {CONVECTION_FORMS}')
        self.spaces = spaces
        self.convection = convection
        mesh = spaces.mesh
        self.bary, weights = tet_rule(5)
        self.phi = p2_basis(self.bary)
        self.dphi = p2_basis_gradients(self.bary, barycentric_gradients(mesh))
        self.jxw = mesh.volumes[:, None] * weights[None, :]

        nodes = spaces.cell_nodes
        self._rows = np.repeat(nodes, 10, axis=1).ravel()
        self._cols = np.tile(nodes, (1, 10)).ravel()
        self._p_rows = np.repeat(mesh.tets, 10, axis=1).ravel()
        self._p_cols = np.tile(nodes, (1, 4)).ravel()

        self.scalar_mass = self._scalar(np.einsum('tq,qi,qj->tij', self.jxw, self.phi, self.phi))
        gradient_pairs = np.einsum('tq,tqic,tqjd->cdtij', self.jxw, self.dphi, self.dphi)
        self.gradient_blocks = [[self._scalar(gradient_pairs[c, d]) for d in range(3)] for c in range(3)]
        self.scalar_stiffness = (self.gradient_blocks[0][0] + self.gradient_blocks[1][1] + self.gradient_blocks[2][2]).tocsr()

        divergence = -np.einsum('tq,qk,tqjb->btkj', self.jxw, self.bary, self.dphi)
        shape = (spaces.n_pressure, spaces.n_nodes)
        self.divergence = sp.hstack([
            sp.coo_matrix((divergence[b].ravel(), (self._p_rows, self._p_cols)), shape=shape).tocsr()
            for b in range(3)
        ]).tocsr()
        self.pressure_mean = np.bincount(mesh.tets.ravel(), weights=np.repeat(mesh.volumes / 4.0, 4), minlength=spaces.n_pressure)
        lam = np.einsum('tq,qk,ql->tkl', self.jxw, self.bary, self.bary)
        self.pressure_mass = sp.coo_matrix(
            (lam.ravel(), (np.repeat(mesh.tets, 4, axis=1).ravel(), np.tile(mesh.tets, (1, 4)).ravel())),
            shape=(spaces.n_pressure, spaces.n_pressure),
        ).tocsr()
        self.vector_mass = sp.block_diag([self.scalar_mass] * 3, format='csr')
        self.vector_stiffness = sp.block_diag([self.scalar_stiffness] * 3, format='csr')
        logger.debug(f'Assembler ready: {spaces.n_velocity} velocity dofs, {spaces.n_pressure} pressure dofs')

    def _scalar(self, element: np.ndarray) -> sp.csr_matrix:
        n = self.spaces.n_nodes
        return sp.coo_matrix((element.ravel(), (self._rows, self._cols)), shape=(n, n)).tocsr()

    def viscous_matrix(self, mu: float) -> sp.csr_matrix:
        """2 mu ∫ D(u):D(phi), i.e. block (a, b) = mu (delta_ab L + G_ba)."""
        blocks = [[mu * self.gradient_blocks[b][a] for b in range(3)] for a in range(3)]
        for a in range(3):
            blocks[a][a] = blocks[a][a] + mu * self.scalar_stiffness
        return sp.bmat(blocks, format='csr')

    def coriolis_matrix(self, rho: float, omega) -> sp.csr_matrix:
        return (rho * sp.kron(sp.csr_matrix(cross_matrix(omega)), self.scalar_mass)).tocsr()

    def quadrature_values(self, u: np.ndarray):
        """Values (n_tets, nq, 3), gradients (n_tets, nq, 3, 3) with [.., m, n] = d_n u_m."""
        cell = self.spaces.cell_values(u)
        values = np.einsum('qi,tic->tqc', self.phi, cell)
        gradients = np.einsum('tqin,tim->tqmn', self.dphi, cell)
        return values, gradients

    def convection_matrix(self, rho: float, w: Optional[np.ndarray]) -> sp.csr_matrix:
        """rho ∫ ((w·∇)u + (div w) u)·phi in conservative form, without the divergence term otherwise."""
        n = self.spaces.n_nodes
        if w is None or not np.any(w):
            return sp.csr_matrix((3 * n, 3 * n))
        w_q, grad_w = self.quadrature_values(w)
        advection = np.einsum('tqc,tqjc->tqj', w_q, self.dphi)
        element = np.einsum('tq,qi,tqj->tij', self.jxw, self.phi, advection)
        if self.convection == 'conservative':
            divergence = np.trace(grad_w, axis1=2, axis2=3)
            element += np.einsum('tq,qi,qj->tij', self.jxw * divergence, self.phi, self.phi)
        return sp.block_diag([rho * self._scalar(element)] * 3, format='csr')

    def assemble(self, rho: float, mu: float, omega, w: Optional[np.ndarray] = None) -> AssembledOperator:
        if rho <= 0 or mu <= 0:
            raise ValueError(f'Density and viscosity must be positive, got rho={rho}, mu={mu}')
        return AssembledOperator(
            M=(rho * self.vector_mass).tocsr(),
            K=self.viscous_matrix(mu),
            N=self.convection_matrix(rho, w),
            S=self.coriolis_matrix(rho, omega),
            B=self.divergence,
            mean=self.pressure_mean,
        )

    def dump(self, operator: AssembledOperator, directory) -> None:
        """Write every block as `row col value` lines."""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        for name in ('M', 'K', 'N', 'S', 'B'):
            block = getattr(operator, name).tocoo()
            lines = [f'{r} {c} {v:.17g}' for r, c, v in zip(block.row, block.col, block.data)]
            (directory / f'{name}.txt').write_text('\n'.join(lines) + '\n', encoding='utf-8')


def assemble(spaces: FunctionSpaces, rho: float, mu: float, omega, w: Optional[np.ndarray] = None,
             convection: str = 'conservative') -> AssembledOperator:
    """One-shot assembly; prefer a long-lived OperatorAssembler inside time loops."""
    return OperatorAssembler(spaces, convection).assemble(rho, mu, omega, w)
