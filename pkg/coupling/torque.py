"""
Torque exerted by the liquid on the body, −∫ x × T(u, p)·n over the cavity wall.

The surface integral is not evaluated from the discrete stress. Instead the
discrete momentum residual is tested with the rigid fields e_i × x, whose
traces reproduce the wall torque exactly for the Galerkin solution. The
stress terms drop out on rigid test fields: the stress is symmetric, their
gradient is skew, and they are solenoidal.
"""
from typing import Optional

import numpy as np

from fem.function_spaces import FunctionSpaces, barycentric_gradients, p2_basis, p2_basis_gradients
from fem.quadrature import tet_rule

DEFAULT_CHUNK = 20000


def traction_torque(spaces: FunctionSpaces, u: np.ndarray, omega, rho: float,
                    u_previous: Optional[np.ndarray] = None, time_step: Optional[float] = None,
                    convection: str = 'conservative', chunk: int = DEFAULT_CHUNK,
                    u_iterate: Optional[np.ndarray] = None) -> np.ndarray:
    """
    Torque on the body for the liquid state u at angular velocity omega.

    `u_previous`/`time_step` supply the implicit Euler time derivative; without
    them the state is treated as instantaneous (∂u/∂t = 0). `u_iterate` is the
    velocity whose relative part convects u, as in the linearized liquid
    problem; it defaults to u itself. Element work is done in chunks so very
    fine meshes stay within memory.
    """
    mesh = spaces.mesh
    omega = np.asarray(omega, dtype=float)
    bary, weights = tet_rule(5)
    phi = p2_basis(bary)
    nodal_u = spaces.nodal_values(u)
    convecting = nodal_u if u_iterate is None else spaces.nodal_values(u_iterate)
    nodal_w = convecting - np.cross(omega, spaces.node_coordinates)
    nodal_rate = None
    if u_previous is not None and time_step is not None:
        nodal_rate = (nodal_u - spaces.nodal_values(u_previous)) / time_step

    moment = np.zeros(3)
    for start in range(0, mesh.n_tets, chunk):
        cells = slice(start, min(start + chunk, mesh.n_tets))
        nodes = spaces.cell_nodes[cells]
        dphi = p2_basis_gradients(bary, barycentric_gradients(mesh, mesh.tets[cells]))
        jxw = mesh.volumes[cells, None] * weights[None, :]
        x_q = np.einsum('qa,tac->tqc', bary, mesh.vertices[mesh.tets[cells]])

        u_cell, w_cell = nodal_u[nodes], nodal_w[nodes]
        u_q = np.einsum('qi,tic->tqc', phi, u_cell)
        w_q = np.einsum('qi,tic->tqc', phi, w_cell)
        grad_u = np.einsum('tqin,tim->tqmn', dphi, u_cell)
        density = np.einsum('tqmn,tqn->tqm', grad_u, w_q) + np.cross(omega, u_q)
        if convection == 'conservative':
            div_w = np.einsum('tqic,tic->tq', dphi, w_cell)
            density += div_w[..., None] * u_q
        if nodal_rate is not None:
            density += np.einsum('qi,tic->tqc', phi, nodal_rate[nodes])
        moment += np.einsum('tq,tqc->c', jxw, np.cross(x_q, density))
    return -rho * moment
