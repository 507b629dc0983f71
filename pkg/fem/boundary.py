from typing import Tuple

import numpy as np
import scipy.sparse as sp

from fem.function_spaces import FunctionSpaces


def boundary_values(spaces: FunctionSpaces, omega) -> Tuple[np.ndarray, np.ndarray]:
    """Boundary velocity dofs and the nodal values of omega × x there."""
    dofs = spaces.boundary_dofs
    return dofs, spaces.rigid_field(omega)[dofs]


def apply_boundary_condition(matrix: sp.spmatrix, rhs: np.ndarray, dofs: np.ndarray, values: np.ndarray):
    """
    Impose x[dofs] = values (for every column of a 2-D rhs): lift the known columns into the right-hand side,
    then replace the constrained rows and columns by the identity.
    """
    matrix = sp.csr_matrix(matrix)
    rhs = np.array(rhs, dtype=float, copy=True)
    lifted = np.zeros(matrix.shape[1])
    lifted[dofs] = values
    rhs -= (matrix @ lifted).reshape((-1,) + (1,) * (rhs.ndim - 1))

    keep = np.ones(matrix.shape[0])
    keep[dofs] = 0.0
    mask = sp.diags(keep)
    constrained = (mask @ matrix @ mask + sp.diags(1.0 - keep)).tocsr()
    rhs[dofs] = np.reshape(values, (-1,) + (1,) * (rhs.ndim - 1))
    return constrained, rhs
