"""Read and write the `cavitymesh 1` text format."""
from pathlib import Path
from typing import Union

import numpy as np

from cavity_errors import MeshValidationError
from meshing.base_mesh import Mesh

HEADER = 'cavitymesh 1'


def save_mesh(mesh: Mesh, path: Union[str, Path]) -> None:
    """Write vertices with 17 significant digits so that load(save(M)) == M bit for bit."""
    lines = [HEADER, f'{mesh.n_vertices} {mesh.n_tets} {len(mesh.boundary_facets)}']
    lines.extend(' '.join(f'{value:.17g}' for value in vertex) for vertex in mesh.vertices)
    lines.extend(' '.join(str(int(index)) for index in tet) for tet in mesh.tets)
    lines.extend(' '.join(str(int(index)) for index in facet) for facet in mesh.boundary_facets)
    Path(path).write_text('\n'.join(lines) + '\n', encoding='utf-8')


def load_mesh(path: Union[str, Path]) -> Mesh:
    path = Path(path)
    if not path.is_file():
        raise MeshValidationError(f'Mesh file not found: {path}')
    lines = [line.strip() for line in path.read_text(encoding='utf-8').splitlines() if line.strip()]
    if not lines or lines[0] != HEADER:
        raise MeshValidationError(f'Could not parse mesh header in {path}: expected "{HEADER}"')
    try:
        nv, nt, nb = (int(token) for token in lines[1].split())
    except (IndexError, ValueError):
        raise MeshValidationError(f'Could not parse mesh counts in {path}')
    body = lines[2:]
    if len(body) != nv + nt + nb:
        raise MeshValidationError(f'Mesh file {path} has {len(body)} data lines, header promises {nv + nt + nb}')

    def rows(block, width, kind, dtype):
        try:
            array = np.array([line.split() for line in block], dtype=dtype)
        except ValueError:
            raise MeshValidationError(f'Could not parse {kind} rows in {path}')
        if array.size and array.shape[1:] != (width,):
            raise MeshValidationError(f'{kind} rows in {path} must have {width} entries')
        return array.reshape(-1, width)

    vertices = rows(body[:nv], 3, 'vertex', float)
    tets = rows(body[nv:nv + nt], 4, 'tet', np.int64)
    facets = rows(body[nv + nt:], 3, 'boundary facet', np.int64)
    return Mesh(vertices, tets, facets, validate=True)
