"""
Ellipsoid meshes by uniform refinement of an icosahedral ball.

The template is the center plus the 12 icosahedron vertices (20 tets). Each
level splits every tet into 8 children (Bey's red refinement, vertex order
kept), then pushes the new boundary vertices out to the unit sphere. The ball
is finally scaled by the semi-axes. Refinement k applies k + 2 levels, giving
1280 * 8**k tets.
"""
import itertools
import logging
from typing import Tuple

import numpy as np

from cavity_constants import BALL_BASE_SUBDIVISIONS, MAX_BALL_REFINEMENT
from cavity_errors import MeshValidationError, RefinementLimitError
from meshing.base_mesh import LOCAL_EDGES, Mesh, edge_keys, extract_boundary, signed_volumes

logger = logging.getLogger(__name__)

# Children of (x0, x1, x2, x3) in terms of local vertices 0-3 and edge midpoints 4-9
# (01, 02, 03, 12, 13, 23).
BEY_CHILDREN = np.array([
    [0, 4, 5, 6],
    [4, 1, 7, 8],
    [5, 7, 2, 9],
    [6, 8, 9, 3],
    [4, 5, 6, 8],
    [4, 5, 7, 8],
    [5, 6, 8, 9],
    [5, 7, 8, 9],
])


def icosahedral_ball() -> Tuple[np.ndarray, np.ndarray]:
    """Center + icosahedron on the unit sphere, 20 positively oriented tets."""
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    shell = []
    for s1, s2 in itertools.product((-1.0, 1.0), repeat=2):
        shell.extend([(0.0, s1, s2 * phi), (s1, s2 * phi, 0.0), (s2 * phi, 0.0, s1)])
    shell = np.array(shell)
    # Faces are the vertex triples at mutual distance 2 (the edge length before scaling).
    faces = [
        (i, j, k) for i, j, k in itertools.combinations(range(12), 3)
        if all(abs(np.linalg.norm(shell[a] - shell[b]) - 2.0) < 1e-9 for a, b in ((i, j), (j, k), (i, k)))
    ]
    vertices = np.vstack([np.zeros(3), shell / np.linalg.norm(shell, axis=1, keepdims=True)])
    tets = np.array([(0, i + 1, j + 1, k + 1) for i, j, k in faces])
    negative = signed_volumes(vertices, tets) < 0
    tets[negative] = tets[negative][:, [0, 1, 3, 2]]
    return vertices, tets


def refine_once(vertices: np.ndarray, tets: np.ndarray, on_boundary: np.ndarray):
    """One level of red refinement. Returns new vertices, tets and boundary mask."""
    nv = len(vertices)
    keys = edge_keys(tets[:, LOCAL_EDGES].reshape(-1, 2), nv)
    unique_keys, inverse = np.unique(keys, return_inverse=True)
    endpoints = np.stack([unique_keys // nv, unique_keys % nv], axis=1)
    midpoints = vertices[endpoints].mean(axis=1)

    facets = extract_boundary(tets)
    facet_keys = np.unique(edge_keys(facets[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2), nv))
    midpoint_on_boundary = np.zeros(len(unique_keys), dtype=bool)
    midpoint_on_boundary[np.searchsorted(unique_keys, facet_keys)] = True

    local = np.hstack([tets, nv + inverse.reshape(-1, 6)])
    children = local[:, BEY_CHILDREN].reshape(-1, 4)
    return (
        np.vstack([vertices, midpoints]),
        children,
        np.concatenate([on_boundary, midpoint_on_boundary]),
    )


def generate_ellipsoid_mesh(semi_axes, refinement: int) -> Mesh:
    """Tet mesh of the ellipsoid x²/a² + y²/b² + z²/c² ≤ 1 centered at the origin."""
    if refinement < 0:
        raise RefinementLimitError('Refinement must be non-negative')
    if refinement > MAX_BALL_REFINEMENT:
        raise RefinementLimitError(
            f'Refinement {refinement} exceeds maximum {MAX_BALL_REFINEMENT} '
            f'({1280 * 8 ** refinement} tets requested)'
        )
    scale = np.asarray(semi_axes, dtype=float)
    if scale.shape != (3,) or np.any(scale <= 0):
        raise MeshValidationError(f'Semi-axes must be three positive lengths, got {semi_axes}')

    vertices, tets = icosahedral_ball()
    on_boundary = np.arange(len(vertices)) > 0
    for _ in range(refinement + BALL_BASE_SUBDIVISIONS):
        vertices, tets, on_boundary = refine_once(vertices, tets, on_boundary)
        before = np.sign(signed_volumes(vertices, tets))
        vertices[on_boundary] /= np.linalg.norm(vertices[on_boundary], axis=1, keepdims=True)
        after = np.sign(signed_volumes(vertices, tets))
        if np.any(before != after):
            raise MeshValidationError('Boundary projection inverted a tet')

    vertices = vertices * scale
    negative = signed_volumes(vertices, tets) < 0
    tets[negative] = tets[negative][:, [0, 1, 3, 2]]
    logger.debug(f'Ellipsoid mesh {tuple(scale)} refinement {refinement}: {len(vertices)} vertices, {len(tets)} tets')
    return Mesh(vertices, tets)
