"""Quadratic velocity / linear pressure spaces on a tet mesh."""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from meshing.base_mesh import LOCAL_EDGES, Mesh


@dataclass
class FunctionSpaces:
    """
    Degree-of-freedom layout of the mixed pair.

    Scalar quadratic nodes are the vertices followed by the edge midpoints.
    Velocity coefficients are component-major: entry c * n_nodes + node.
    Pressure coefficients live on the vertices.
    """
    mesh: Mesh
    cell_nodes: np.ndarray = field(init=False)
    node_coordinates: np.ndarray = field(init=False)
    boundary_nodes: np.ndarray = field(init=False)

    def __post_init__(self):
        mesh = self.mesh
        self.cell_nodes = np.hstack([mesh.tets, mesh.n_vertices + mesh.tet_edges])
        midpoints = mesh.vertices[mesh.edges].mean(axis=1)
        self.node_coordinates = np.vstack([mesh.vertices, midpoints])
        self.boundary_nodes = np.concatenate([mesh.boundary_vertices, mesh.n_vertices + mesh.boundary_edges])

    @property
    def n_nodes(self) -> int:
        return self.mesh.n_vertices + len(self.mesh.edges)

    @property
    def n_velocity(self) -> int:
        return 3 * self.n_nodes

    @property
    def n_pressure(self) -> int:
        return self.mesh.n_vertices

    @property
    def boundary_dofs(self) -> np.ndarray:
        """Velocity dofs of all three components at boundary nodes."""
        return np.concatenate([c * self.n_nodes + self.boundary_nodes for c in range(3)])

    def interpolate(self, vector_field: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        """Nodal interpolant of f(x) -> (n, 3); exact for polynomials of degree ≤ 2."""
        values = np.asarray(vector_field(self.node_coordinates), dtype=float).reshape(self.n_nodes, 3)
        return values.T.reshape(-1).copy()

    def interpolate_pressure(self, scalar_field: Callable[[np.ndarray], np.ndarray]) -> np.ndarray:
        return np.asarray(scalar_field(self.mesh.vertices), dtype=float).reshape(-1).copy()

    def nodal_values(self, u: np.ndarray) -> np.ndarray:
        """Coefficient vector as (n_nodes, 3)."""
        return u.reshape(3, self.n_nodes).T

    def rigid_field(self, omega) -> np.ndarray:
        """Coefficients of omega × x."""
        omega = np.asarray(omega, dtype=float)
        return self.interpolate(lambda x: np.cross(omega, x))

    @cached_property
    def rigid_basis(self) -> np.ndarray:
        """Rows are the coefficients of e_i × x, i = 1, 2, 3."""
        return np.stack([self.rigid_field(e) for e in np.eye(3)])

    def cell_values(self, u: np.ndarray) -> np.ndarray:
        """Per-cell nodal values, shape (n_tets, 10, 3)."""
        return self.nodal_values(u)[self.cell_nodes]


def build_spaces(mesh: Mesh) -> FunctionSpaces:
    return FunctionSpaces(mesh)


def p2_basis(bary: np.ndarray) -> np.ndarray:
    """Quadratic basis values at barycentric points, shape (n_points, 10)."""
    vertex = bary * (2.0 * bary - 1.0)
    edge = 4.0 * bary[:, LOCAL_EDGES[:, 0]] * bary[:, LOCAL_EDGES[:, 1]]
    return np.hstack([vertex, edge])


def p2_basis_gradients(bary: np.ndarray, lambda_gradients: np.ndarray) -> np.ndarray:
    """
    Physical gradients of the quadratic basis.

    bary: (n_points, 4); lambda_gradients: (n_tets, 4, 3).
    Returns (n_tets, n_points, 10, 3).
    """
    g = lambda_gradients[:, None, :, :]
    lam = bary[None, :, :, None]
    vertex = (4.0 * lam - 1.0) * g
    a, b = LOCAL_EDGES[:, 0], LOCAL_EDGES[:, 1]
    edge = 4.0 * (lam[:, :, a] * g[:, :, b] + lam[:, :, b] * g[:, :, a])
    return np.concatenate([vertex, edge], axis=2)


def barycentric_gradients(mesh: Mesh, tets=None) -> np.ndarray:
    """Constant gradients of the barycentric coordinates, shape (n_tets, 4, 3)."""
    tets = mesh.tets if tets is None else tets
    x = mesh.vertices[tets]
    jacobian = np.stack([x[:, 1] - x[:, 0], x[:, 2] - x[:, 0], x[:, 3] - x[:, 0]], axis=2)
    inverse = np.linalg.inv(jacobian)
    grads = np.empty((len(tets), 4, 3))
    grads[:, 1:, :] = inverse
    grads[:, 0, :] = -inverse.sum(axis=1)
    return grads
