from functools import cached_property
from typing import Dict

import numpy as np

from cavity_errors import MeshValidationError

# Local faces of a positively oriented tet, ordered so the normal points outward.
LOCAL_FACES = np.array([[1, 2, 3], [0, 3, 2], [0, 1, 3], [0, 2, 1]])
# Local edge order shared with the quadratic element.
LOCAL_EDGES = np.array([[0, 1], [0, 2], [0, 3], [1, 2], [1, 3], [2, 3]])


def signed_volumes(vertices: np.ndarray, tets: np.ndarray) -> np.ndarray:
    """Signed volume of every tet under its stored vertex order."""
    x0 = vertices[tets[:, 0]]
    e1 = vertices[tets[:, 1]] - x0
    e2 = vertices[tets[:, 2]] - x0
    e3 = vertices[tets[:, 3]] - x0
    return np.einsum('ij,ij->i', e1, np.cross(e2, e3)) / 6.0


def extract_boundary(tets: np.ndarray) -> np.ndarray:
    """Faces used by exactly one tet, in the outward order of their owner."""
    faces = tets[:, LOCAL_FACES].reshape(-1, 3)
    keys = np.sort(faces, axis=1)
    _, index, counts = np.unique(keys, axis=0, return_index=True, return_counts=True)
    once = np.sort(index[counts == 1])
    return faces[once]


def edge_keys(pairs: np.ndarray, n_vertices: int) -> np.ndarray:
    """Order-independent int64 key of each vertex pair."""
    lo = np.minimum(pairs[:, 0], pairs[:, 1]).astype(np.int64)
    hi = np.maximum(pairs[:, 0], pairs[:, 1]).astype(np.int64)
    return lo * n_vertices + hi


class Mesh:
    """Tetrahedral mesh of the cavity with outward boundary facets."""

    def __init__(self, vertices, tets, boundary_facets=None, validate: bool = True):
        self.vertices = np.ascontiguousarray(vertices, dtype=float).reshape(-1, 3)
        self.tets = np.ascontiguousarray(tets, dtype=np.int64).reshape(-1, 4)
        if boundary_facets is None:
            boundary_facets = extract_boundary(self.tets)
        self.boundary_facets = np.ascontiguousarray(boundary_facets, dtype=np.int64).reshape(-1, 3)
        if validate:
            self.validate()

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_tets(self) -> int:
        return len(self.tets)

    @cached_property
    def volumes(self) -> np.ndarray:
        return signed_volumes(self.vertices, self.tets)

    @cached_property
    def _edge_table(self):
        pairs = self.tets[:, LOCAL_EDGES].reshape(-1, 2)
        keys = edge_keys(pairs, self.n_vertices)
        unique_keys, inverse = np.unique(keys, return_inverse=True)
        edges = np.stack([unique_keys // self.n_vertices, unique_keys % self.n_vertices], axis=1)
        return edges, inverse.reshape(-1, 6), unique_keys

    @property
    def edges(self) -> np.ndarray:
        """Unique edges as sorted vertex pairs."""
        return self._edge_table[0]

    @property
    def tet_edges(self) -> np.ndarray:
        """Global edge index of each local edge, shape (n_tets, 6)."""
        return self._edge_table[1]

    @cached_property
    def boundary_vertices(self) -> np.ndarray:
        return np.unique(self.boundary_facets)

    @cached_property
    def boundary_edges(self) -> np.ndarray:
        """Indices into `edges` of edges lying on a boundary facet."""
        pairs = self.boundary_facets[:, [[0, 1], [1, 2], [2, 0]]].reshape(-1, 2)
        keys = np.unique(edge_keys(pairs, self.n_vertices))
        return np.searchsorted(self._edge_table[2], keys)

    @cached_property
    def facet_normals(self) -> np.ndarray:
        """Area-weighted outward normals (length = facet area)."""
        x = self.vertices[self.boundary_facets]
        return 0.5 * np.cross(x[:, 1] - x[:, 0], x[:, 2] - x[:, 0])

    def validate(self) -> None:
        nv = self.n_vertices
        if self.n_tets == 0:
            raise MeshValidationError('Mesh has no tets')
        for name, array in (('tet', self.tets), ('boundary facet', self.boundary_facets)):
            if array.size and (array.min() < 0 or array.max() >= nv):
                raise MeshValidationError(f'{name} vertex index out of range [0, {nv})')
        if not np.all(np.isfinite(self.vertices)):
            raise MeshValidationError('Non-finite vertex coordinates')

        volumes = self.volumes
        bad = np.flatnonzero(volumes <= 0.0)
        if bad.size:
            raise MeshValidationError(f'{bad.size} tets with non-positive volume (first: tet {bad[0]}, volume {volumes[bad[0]]:.3e})')

        faces = np.sort(self.tets[:, LOCAL_FACES].reshape(-1, 3), axis=1)
        keys, inverse, counts = np.unique(faces, axis=0, return_inverse=True, return_counts=True)
        if counts.max() > 2:
            raise MeshValidationError('A face is shared by more than two tets')
        open_faces = keys[counts == 1]

        facets = np.sort(self.boundary_facets, axis=1)
        facet_keys, facet_inverse, facet_counts = np.unique(facets, axis=0, return_inverse=True, return_counts=True)
        if facet_counts.size and facet_counts.max() > 1:
            raise MeshValidationError('Duplicate boundary facet')
        if len(facet_keys) != len(open_faces) or not np.array_equal(facet_keys, open_faces):
            raise MeshValidationError(
                f'Boundary is not closed: {len(open_faces)} unshared tet faces vs {len(facet_keys)} boundary facets'
            )

        # Owner tet of each boundary facet, for the outward test.
        owner_of_key = np.full(len(keys), -1, dtype=np.int64)
        owner_of_key[inverse.ravel()] = np.repeat(np.arange(self.n_tets), 4)
        facet_owner = owner_of_key[np.flatnonzero(counts == 1)][facet_inverse.ravel()]
        facet_centroids = self.vertices[self.boundary_facets].mean(axis=1)
        tet_centroids = self.vertices[self.tets[facet_owner]].mean(axis=1)
        outward = np.einsum('ij,ij->i', self.facet_normals, facet_centroids - tet_centroids)
        inward = np.flatnonzero(outward <= 0.0)
        if inward.size:
            raise MeshValidationError(f'{inward.size} boundary facets point inward (first: facet {inward[0]})')


def mesh_measures(mesh: Mesh) -> Dict[str, object]:
    """Volume, centroid, tet-volume range and boundary area of a valid mesh."""
    volumes = mesh.volumes
    total = float(volumes.sum())
    centroids = mesh.vertices[mesh.tets].mean(axis=1)
    x0 = mesh.vertices[mesh.boundary_facets[:, 0]]
    divergence_volume = float(np.einsum('ij,ij->', x0, mesh.facet_normals) / 3.0)
    return {
        'volume': total,
        'centroid': (volumes @ centroids) / total,
        'min_tet_volume': float(volumes.min()),
        'max_tet_volume': float(volumes.max()),
        'boundary_area': float(np.linalg.norm(mesh.facet_normals, axis=1).sum()),
        'divergence_volume': divergence_volume,
        'n_vertices': mesh.n_vertices,
        'n_tets': mesh.n_tets,
        'n_boundary_facets': len(mesh.boundary_facets),
    }

