import numpy as np
import pytest
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from cavity_errors import SingularSystemError
from fem.assembly import OperatorAssembler, assemble, cross_matrix
from fem.boundary import apply_boundary_condition, boundary_values
from fem.fields import angular_moment, norms, project_divergence_free, relative_velocity
from fem.function_spaces import build_spaces, p2_basis
from fem.saddle_point import inf_sup_constant, solve_saddle_point
from meshing.base_mesh import mesh_measures
from meshing.ellipsoid_mesher import generate_ellipsoid_mesh
from rigid_body.inertia import liquid_inertia

OMEGA = np.array([0.3, -0.7, 1.1])


@pytest.fixture(scope="module")
def assembler():
    mesh = generate_ellipsoid_mesh([1.2, 1.0, 0.8], 0)
    return OperatorAssembler(build_spaces(mesh))


def test_space_sizes(assembler):
    spaces = assembler.spaces
    mesh = spaces.mesh
    assert spaces.n_nodes == mesh.n_vertices + len(mesh.edges)
    assert spaces.n_velocity == 3 * spaces.n_nodes
    assert spaces.n_pressure == mesh.n_vertices
    assert len(spaces.boundary_dofs) == 3 * len(spaces.boundary_nodes)


def test_p2_basis_is_partition_of_unity():
    bary = np.array([[0.25, 0.25, 0.25, 0.25], [0.1, 0.2, 0.3, 0.4], [1.0, 0.0, 0.0, 0.0]])
    np.testing.assert_allclose(p2_basis(bary).sum(axis=1), 1.0, atol=1e-14)


def test_cross_matrix():
    v = np.array([2.0, -1.0, 0.5])
    np.testing.assert_allclose(cross_matrix(OMEGA) @ v, np.cross(OMEGA, v), atol=1e-15)


def test_mass_integrates_volume(assembler):
    volume = mesh_measures(assembler.spaces.mesh)['volume']
    ones = np.ones(assembler.spaces.n_nodes)
    assert ones @ (assembler.scalar_mass @ ones) == pytest.approx(volume, rel=1e-12)
    assert assembler.pressure_mean.sum() == pytest.approx(volume, rel=1e-12)


def test_rigid_field_has_no_viscous_energy(assembler):
    u = assembler.spaces.rigid_field(OMEGA)
    viscous = assembler.viscous_matrix(1.0)
    reference = u @ (assembler.vector_stiffness @ u)
    assert reference > 0
    assert abs(u @ (viscous @ u)) <= 1e-12 * reference
    assert np.linalg.norm(viscous @ u) <= 1e-10 * np.linalg.norm(assembler.vector_stiffness @ u)


def test_constants_and_rigid_fields_are_weakly_solenoidal(assembler):
    spaces = assembler.spaces
    constant = spaces.interpolate(lambda x: np.tile([1.0, -2.0, 0.5], (len(x), 1)))
    assert np.abs(assembler.divergence @ constant).max() <= 1e-12
    assert np.abs(assembler.divergence @ spaces.rigid_field(OMEGA)).max() <= 1e-12


def test_coriolis_block_is_skew(assembler):
    coriolis = assembler.coriolis_matrix(1.0, OMEGA)
    assert spla.norm(coriolis + coriolis.T) <= 1e-12 * spla.norm(coriolis)


def test_convection_without_iterate_is_empty(assembler):
    assert assembler.convection_matrix(1.0, None).nnz == 0


def test_assemble_rejects_nonpositive_parameters(assembler):
    with pytest.raises(ValueError):
        assembler.assemble(0.0, 1.0, OMEGA)
    with pytest.raises(ValueError):
        OperatorAssembler(assembler.spaces, 'upwind')


def test_momentum_matrix_combines_blocks(assembler):
    operator = assembler.assemble(2.0, 0.5, OMEGA)
    steady = operator.momentum_matrix(None)
    timed = operator.momentum_matrix(0.1)
    assert spla.norm(timed - steady - operator.M / 0.1) <= 1e-12 * spla.norm(timed)


def test_boundary_condition_lift():
    matrix = sp.csr_matrix(np.array([[4.0, 1.0, 0.0], [1.0, 3.0, 1.0], [0.0, 1.0, 2.0]]))
    rhs = np.array([1.0, 2.0, 3.0])
    constrained, lifted = apply_boundary_condition(matrix, rhs, np.array([0]), np.array([0.5]))
    solution = np.linalg.solve(constrained.toarray(), lifted)
    assert solution[0] == pytest.approx(0.5)
    np.testing.assert_allclose(matrix.toarray()[1:] @ solution, rhs[1:])


def test_boundary_condition_lift_with_several_columns():
    matrix = sp.csr_matrix(np.array([[4.0, 1.0], [1.0, 3.0]]))
    rhs = np.array([[1.0, 0.0], [2.0, 1.0]])
    constrained, lifted = apply_boundary_condition(matrix, rhs, np.array([1]), np.array([0.25]))
    solution = np.linalg.solve(constrained.toarray(), lifted)
    np.testing.assert_allclose(solution[1], [0.25, 0.25])
    np.testing.assert_allclose(4.0 * solution[0] + 0.25, rhs[0])


def test_stokes_with_rigid_wall_returns_rigid_motion(assembler):
    spaces = assembler.spaces
    operator = assemble(spaces, 1.0, 1.0, np.zeros(3))
    dofs, values = boundary_values(spaces, OMEGA)
    solution = solve_saddle_point(operator.momentum_matrix(None), operator.B, operator.mean,
                                  np.zeros(spaces.n_velocity), dofs, values)
    rigid = spaces.rigid_field(OMEGA)
    assert np.abs(solution.u - rigid).max() <= 1e-10 * np.abs(rigid).max()
    assert np.abs(solution.p).max() <= 1e-9
    assert solution.residual <= 1e-10


def test_singular_system_is_reported(assembler):
    spaces = assembler.spaces
    zero = sp.csr_matrix((spaces.n_velocity, spaces.n_velocity))
    with pytest.raises(SingularSystemError):
        solve_saddle_point(zero, assembler.divergence, assembler.pressure_mean, np.zeros(spaces.n_velocity),
                           np.array([], dtype=int), np.array([]))


def test_projection_is_solenoidal_and_vanishes_on_wall(assembler):
    spaces = assembler.spaces
    rng = np.random.default_rng(3)
    v = project_divergence_free(assembler, rng.standard_normal(spaces.n_velocity))
    assert np.abs(v[spaces.boundary_dofs]).max() == 0.0
    assert np.abs(assembler.divergence @ v).max() <= 1e-10 * np.abs(v).max()


def test_relative_velocity_and_norms(assembler):
    spaces = assembler.spaces
    u = spaces.rigid_field(OMEGA)
    assert np.abs(relative_velocity(assembler, u, OMEGA)).max() == 0.0
    assert norms(assembler, u, OMEGA) == {'v_l2': 0.0, 'gradv_l2': 0.0}


def test_angular_moment_of_rigid_field_is_inertia(assembler):
    spaces = assembler.spaces
    inertia = liquid_inertia(spaces.mesh, 1.0)
    moment = angular_moment(assembler, spaces.rigid_field(OMEGA))
    np.testing.assert_allclose(moment, inertia.matrix @ OMEGA, rtol=1e-12, atol=1e-13)


def test_inf_sup_constant_is_positive(assembler):
    assert inf_sup_constant(assembler) > 0.05


def rigid_motions(spaces):
    translations = [spaces.interpolate(lambda x, e=e: np.tile(e, (len(x), 1))) for e in np.eye(3)]
    rotations = [spaces.rigid_field(e) for e in np.eye(3)]
    return translations + rotations


def test_viscous_kernel_contains_every_rigid_motion(assembler):
    viscous = assembler.viscous_matrix(1.0)
    scale = spla.norm(viscous)
    for u in rigid_motions(assembler.spaces):
        assert np.linalg.norm(viscous @ u) <= 1e-10 * scale * np.linalg.norm(u)
        assert abs(u @ (viscous @ u)) <= 1e-12 * scale * (u @ u)


def test_viscous_energy_is_positive_off_the_rigid_motions(assembler):
    viscous = assembler.viscous_matrix(1.0)
    rng = np.random.default_rng(5)
    for _ in range(10):
        u = rng.standard_normal(assembler.spaces.n_velocity)
        assert u @ (viscous @ u) > 1e-6 * (u @ (assembler.vector_stiffness @ u))
