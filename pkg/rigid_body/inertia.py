import logging
from typing import Sequence, Tuple

import numpy as np
import scipy.linalg

from cavity_errors import InfeasibleInertiaError, MeshValidationError
from meshing.base_mesh import Mesh

logger = logging.getLogger(__name__)


def eigenframe(matrix: np.ndarray, rtol: float = 1e-9) -> Tuple[np.ndarray, np.ndarray]:
    """
    Ascending eigenvalues and a right-handed orthonormal eigenframe (columns).

    Repeated eigenvalues get the Gram-Schmidt span of the coordinate axes taken
    in order x, y, z; every axis has its largest component positive, except
    that e3 may be flipped to make the frame right-handed.
    """
    values, vectors = scipy.linalg.eigh(0.5 * (matrix + matrix.T))
    scale = max(np.abs(values).max(), np.finfo(float).tiny)
    frame = vectors.copy()
    start = 0
    while start < 3:
        stop = start + 1
        while stop < 3 and abs(values[stop] - values[start]) <= rtol * scale:
            stop += 1
        if stop - start > 1:
            projector = vectors[:, start:stop] @ vectors[:, start:stop].T
            basis = []
            for axis in np.eye(3):
                candidate = projector @ axis
                for b in basis:
                    candidate = candidate - (b @ candidate) * b
                if np.linalg.norm(candidate) > 1e-8:
                    basis.append(candidate / np.linalg.norm(candidate))
                if len(basis) == stop - start:
                    break
            frame[:, start:stop] = np.column_stack(basis)
            values[start:stop] = values[start:stop].mean()
        start = stop
    for k in range(3):
        if frame[np.argmax(np.abs(frame[:, k])), k] < 0:
            frame[:, k] *= -1.0
    if np.linalg.det(frame) < 0:
        frame[:, 2] *= -1.0
    return values, frame


class InertiaTensor:
    """Symmetric 3x3 inertia tensor with its principal moments A ≤ B ≤ C."""

    def __init__(self, matrix, require_definite: bool = True):
        matrix = np.asarray(matrix, dtype=float).reshape(3, 3)
        if not np.allclose(matrix, matrix.T, rtol=1e-12, atol=1e-14 * max(np.abs(matrix).max(), 1.0)):
            raise ValueError('Inertia tensor must be symmetric')
        self.matrix = 0.5 * (matrix + matrix.T)
        self.moments, self.frame = eigenframe(self.matrix)
        if require_definite and self.moments[0] <= 0:
            raise ValueError(f'Inertia tensor must be positive definite, smallest moment {self.moments[0]:.3e}')

    @property
    def principal(self) -> Tuple[float, float, float]:
        return tuple(float(m) for m in self.moments)

    def __add__(self, other: 'InertiaTensor') -> 'InertiaTensor':
        return InertiaTensor(self.matrix + other.matrix)

    def to_frame(self, vector) -> np.ndarray:
        """Components of a body-frame vector in the eigenframe."""
        return self.frame.T @ np.asarray(vector, dtype=float)

    def solve(self, vector) -> np.ndarray:
        return np.linalg.solve(self.matrix, np.asarray(vector, dtype=float))

    def is_isotropic(self, rtol: float = 1e-6) -> bool:
        return bool(self.moments[2] - self.moments[0] <= rtol * self.moments[2])

    def satisfies_triangle_inequalities(self, rtol: float = 1e-12) -> bool:
        a, b, c = self.moments
        return bool(a + b >= c * (1 - rtol))

    def __repr__(self) -> str:
        a, b, c = self.moments
        return f'InertiaTensor(A={a:.6g}, B={b:.6g}, C={c:.6g})'


def second_moments(mesh: Mesh) -> np.ndarray:
    """∫ x ⊗ x over the mesh, exact on straight tets."""
    x = mesh.vertices[mesh.tets]
    s = x.sum(axis=1)
    per_tet = np.einsum('tai,taj->tij', x, x) + np.einsum('ti,tj->tij', s, s)
    return np.einsum('t,tij->ij', mesh.volumes / 20.0, per_tet)


def liquid_inertia(mesh: Mesh, rho: float) -> InertiaTensor:
    """rho ∫ (|x|² 1 − x ⊗ x) over the cavity."""
    if rho <= 0:
        raise ValueError(f'Density must be positive, got {rho}')
    if mesh.volumes.min() <= 0:
        raise MeshValidationError('Degenerate mesh: non-positive tet volume')
    moments = second_moments(mesh)
    return InertiaTensor(rho * (np.trace(moments) * np.eye(3) - moments))


def shell_inertia(mode: str, values: Sequence[float], liquid: InertiaTensor, tolerance: float = 1e-12) -> InertiaTensor:
    """
    Body inertia I_B.

    `explicit`: values are the nine entries (or three diagonal entries) of I_B.
    `target_total`: values are the wanted eigenvalues of I = I_B + I_L, aligned
    smallest-with-smallest with the liquid's principal axes.
    """
    values = np.asarray(values, dtype=float)
    if mode == 'explicit':
        matrix = np.diag(values) if values.size == 3 else values.reshape(3, 3)
        return InertiaTensor(matrix)
    if mode != 'target_total':
        raise ValueError(f'Unknown inertia mode {mode!r}')
    if values.size != 3:
        raise ValueError('target_total inertia needs three eigenvalues')
    target = np.sort(values)
    total = liquid.frame @ np.diag(target) @ liquid.frame.T
    body = total - liquid.matrix
    smallest = np.linalg.eigvalsh(body).min()
    if smallest < -tolerance * target.max():
        raise InfeasibleInertiaError(
            f'Target eigenvalues {tuple(target)} are infeasible for liquid moments '
            f'{liquid.principal}: body tensor would have eigenvalue {smallest:.4g}'
        )
    logger.debug(f'Body inertia calibrated: smallest body moment {smallest:.6g}')
    return InertiaTensor(body, require_definite=False)
