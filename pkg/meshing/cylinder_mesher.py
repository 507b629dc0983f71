"""Cylinder meshes: a ring-structured disk triangulation extruded in layers, each prism split into 3 tets."""
import logging
from typing import List, Tuple

import numpy as np

from cavity_constants import MAX_CYLINDER_REFINEMENT
from cavity_errors import MeshValidationError, RefinementLimitError
from meshing.base_mesh import Mesh, signed_volumes

logger = logging.getLogger(__name__)


def ring_start(j: int) -> int:
    """Index of the first vertex of ring j (ring 0 is the center)."""
    return 0 if j == 0 else 1 + 3 * j * (j - 1)


def disk_triangulation(radius: float, rings: int) -> Tuple[np.ndarray, np.ndarray]:
    """Points and triangles of a disk with `rings` rings of 6j points each."""
    points = [np.zeros(2)]
    for j in range(1, rings + 1):
        angles = 2.0 * np.pi * np.arange(6 * j) / (6 * j)
        points.extend(radius * j / rings * np.stack([np.cos(angles), np.sin(angles)], axis=1))
    triangles: List[Tuple[int, int, int]] = []
    for j in range(1, rings + 1):
        outer_n, outer_0 = 6 * j, ring_start(j)
        if j == 1:
            triangles.extend((0, outer_0 + o, outer_0 + (o + 1) % outer_n) for o in range(outer_n))
            continue
        inner_n, inner_0 = 6 * (j - 1), ring_start(j - 1)
        i = o = 0
        # Merge walk: advance on whichever ring has the smaller next angle.
        while i < inner_n or o < outer_n:
            next_inner = (i + 1) / inner_n
            next_outer = (o + 1) / outer_n
            a = inner_0 + i % inner_n
            b = outer_0 + o % outer_n
            if o < outer_n and (next_outer <= next_inner or i >= inner_n):
                triangles.append((a, b, outer_0 + (o + 1) % outer_n))
                o += 1
            else:
                triangles.append((a, b, inner_0 + (i + 1) % inner_n))
                i += 1
    return np.array(points), np.array(triangles)


def generate_cylinder_mesh(radius: float, height: float, refinement: int) -> Mesh:
    """Tet mesh of the cylinder x² + y² ≤ R², |z| ≤ h/2. Uses 2**(k+1) rings and about as many layers per R."""
    if refinement < 0 or refinement > MAX_CYLINDER_REFINEMENT:
        raise RefinementLimitError(f'Cylinder refinement must be in [0, {MAX_CYLINDER_REFINEMENT}], got {refinement}')
    if radius <= 0 or height <= 0:
        raise MeshValidationError(f'Cylinder radius and height must be positive, got R={radius}, h={height}')

    rings = 2 ** (refinement + 1)
    layers = max(1, int(round(rings * height / radius)))
    disk, triangles = disk_triangulation(radius, rings)
    n_disk = len(disk)

    z = np.linspace(-0.5 * height, 0.5 * height, layers + 1)
    vertices = np.hstack([np.tile(disk, (layers + 1, 1)), np.repeat(z, n_disk)[:, None]])

    # Splitting by sorted disk index makes neighbouring prisms agree on shared quad diagonals.
    i, j, k = np.sort(triangles, axis=1).T
    tets = []
    for layer in range(layers):
        lo, hi = layer * n_disk, (layer + 1) * n_disk
        tets.append(np.stack([i + lo, j + lo, k + lo, k + hi], axis=1))
        tets.append(np.stack([i + lo, j + lo, j + hi, k + hi], axis=1))
        tets.append(np.stack([i + lo, i + hi, j + hi, k + hi], axis=1))
    tets = np.vstack(tets)
    negative = signed_volumes(vertices, tets) < 0
    tets[negative] = tets[negative][:, [0, 1, 3, 2]]
    logger.debug(f'Cylinder mesh R={radius} h={height} refinement {refinement}: {len(vertices)} vertices, {len(tets)} tets')
    return Mesh(vertices, tets)
