import numpy as np
import pytest

from analysis.derived import zero_moment_field
from cavity_errors import ConfigError, PecletLimitError, SubIterationError
from coupling.coupled_solver import CoupledSolver, body_step
from coupling.initial_data import ellipsoid_radius, radial_profile_velocity
from coupling.time_series import COLUMNS
from meshing.ellipsoid_mesher import generate_ellipsoid_mesh
from rigid_body.inertia import InertiaTensor, liquid_inertia, shell_inertia
from validators.solver_validators import SolverSettings


@pytest.fixture(scope="module")
def ball():
    return generate_ellipsoid_mesh([1.0, 1.0, 1.0], 0)


@pytest.fixture(scope="module")
def ellipsoid():
    return generate_ellipsoid_mesh([1.2, 1.0, 0.8], 0)


def make_solver(mesh, moments, **settings):
    body = shell_inertia('target_total', moments, liquid_inertia(mesh, 1.0))
    options = {'time_step': 0.05, 'final_time': 0.15, 'relaxation': 0.9}
    options.update(settings)
    return CoupledSolver(mesh, body, SolverSettings(**options), rho=1.0, nu=0.1)


@pytest.fixture(scope="module")
def spherical_solver(ball):
    return make_solver(ball, [3.0, 3.0, 3.0])


@pytest.fixture(scope="module")
def ellipsoid_solver(ellipsoid):
    return make_solver(ellipsoid, [5.54, 6.73, 6.76])


def test_body_step_without_torque_keeps_isotropic_spin():
    omega = np.array([0.3, -0.2, 1.0])
    updated = body_step(2.0 * np.eye(3), omega, np.zeros(3), np.zeros(3), 0.5, 0.1)
    np.testing.assert_allclose(updated, omega)


def test_body_step_weights_torques_by_theta():
    zero = np.zeros(3)
    updated = body_step(2.0 * np.eye(3), zero, np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]), 0.25, 0.2)
    np.testing.assert_allclose(updated, 0.2 * np.array([0.75, 0.25, 0.0]) / 2.0)


def test_body_step_gyroscopic_forms_agree_at_fixed_point():
    inertia = np.diag([1.0, 2.0, 3.0])
    omega = np.array([0.5, 0.4, 1.0])
    zero = np.zeros(3)
    midpoint = body_step(inertia, omega, zero, zero, 0.5, 0.01, omega_iterate=omega)
    trapezoidal = body_step(inertia, omega, zero, zero, 0.5, 0.01, omega_iterate=omega, gyroscopic='trapezoidal')
    np.testing.assert_allclose(midpoint, trapezoidal)
    np.testing.assert_allclose(midpoint, omega + 0.01 * np.linalg.solve(inertia, -np.cross(omega, inertia @ omega)))


def test_body_step_rejects_unknown_gyroscopic_form():
    with pytest.raises(ValueError):
        body_step(np.eye(3), np.ones(3), np.zeros(3), np.zeros(3), 0.5, 0.1, gyroscopic='leapfrog')


def test_solver_rejects_bad_parameters(ball):
    body = InertiaTensor(np.eye(3))
    with pytest.raises(ConfigError):
        CoupledSolver(ball, body, SolverSettings(), rho=0.0, nu=0.1)
    with pytest.raises(ConfigError):
        CoupledSolver(ball, body, SolverSettings(), rho=1.0, nu=-1.0)


def test_solver_needs_definite_body_for_body_update(ball):
    body = InertiaTensor(np.diag([0.0, 1.0, 1.0]), require_definite=False)
    with pytest.raises(ConfigError):
        CoupledSolver(ball, body, SolverSettings(), rho=1.0, nu=0.1)
    solver = CoupledSolver(ball, body, SolverSettings(body_problem_inertia='total'), rho=1.0, nu=0.1)
    np.testing.assert_allclose(solver.step_inertia, solver.total_inertia.matrix)


def test_total_inertia_hits_target(ellipsoid_solver):
    np.testing.assert_allclose(ellipsoid_solver.total_inertia.moments, [5.54, 6.73, 6.76], rtol=1e-12)


def test_initial_state_is_rigid(ellipsoid_solver):
    omega = np.array([0.1, 0.2, 1.0])
    state = ellipsoid_solver.initial_state(omega)
    np.testing.assert_allclose(state.flow.u, ellipsoid_solver.spaces.rigid_field(omega))
    assert state.t == 0.0
    assert state.step == 0


def test_initial_state_validation(ellipsoid_solver):
    spaces = ellipsoid_solver.spaces
    omega = np.array([0.0, 0.0, 1.0])
    with pytest.raises(ConfigError, match="entries"):
        ellipsoid_solver.initial_state(omega, np.zeros(5))
    wall = np.zeros(spaces.n_velocity)
    wall[spaces.boundary_dofs[0]] = 1.0
    with pytest.raises(ConfigError, match="wall"):
        ellipsoid_solver.initial_state(omega, wall)
    interior = np.random.default_rng(0).standard_normal(spaces.n_velocity)
    interior[spaces.boundary_dofs] = 0.0
    with pytest.raises(ConfigError, match="divergence"):
        ellipsoid_solver.initial_state(omega, interior)


def test_spherical_system_keeps_rotation_exactly(spherical_solver):
    omega = np.array([0.3, -0.4, 1.2])
    series = spherical_solver.run(omega)
    assert len(series) == 4
    np.testing.assert_allclose(series.t, [0.0, 0.05, 0.1, 0.15])
    np.testing.assert_allclose(series.omega, np.tile(spherical_solver.total_inertia.to_frame(omega), (4, 1)),
                               rtol=1e-10, atol=1e-12)
    assert series.column('v_l2').max() <= 1e-10
    assert np.all(series.column('subiters')[1:] == 1)


def test_permanent_rotation_about_major_axis_is_steady(ellipsoid_solver):
    axis = ellipsoid_solver.total_inertia.frame[:, 2]
    state = ellipsoid_solver.initial_state(2.0 * axis)
    for _ in range(2):
        state = ellipsoid_solver.step(state)
    np.testing.assert_allclose(state.body.omega, 2.0 * axis, atol=1e-10)
    np.testing.assert_allclose(state.flow.u, ellipsoid_solver.spaces.rigid_field(2.0 * axis), atol=1e-9)
    assert state.subiterations == 1


def test_tilted_rotation_dissipates_and_keeps_momentum(ellipsoid_solver):
    frame = ellipsoid_solver.total_inertia.frame
    omega = frame @ np.array([0.4, 0.3, 2.0])
    series = ellipsoid_solver.run(omega)
    energy = series.column('E_total')
    magnitude = np.linalg.norm(series.momentum, axis=1)
    assert energy[-1] <= energy[0] * (1 + 1e-8)
    assert np.abs(magnitude - magnitude[0]).max() <= 0.01 * magnitude[0]
    assert series.column('v_l2')[-1] > 0
    assert set(series.frame_data.columns) == set(COLUMNS)


def test_record_uses_eigenframe_components(ellipsoid_solver):
    omega = ellipsoid_solver.total_inertia.frame @ np.array([0.1, 0.2, 0.3])
    record = ellipsoid_solver.record(ellipsoid_solver.initial_state(omega))
    assert (record['p'], record['q'], record['r']) == pytest.approx((0.1, 0.2, 0.3))
    moments = ellipsoid_solver.total_inertia.moments
    assert record['Cr'] == pytest.approx(moments[2] * 0.3)
    assert record['E_liquid'] == pytest.approx(0.0, abs=1e-12)


def test_subiteration_limit_is_reported(ellipsoid):
    solver = make_solver(ellipsoid, [5.54, 6.73, 6.76], max_subiters=1, tolerance=1e-14)
    frame = solver.total_inertia.frame
    state = solver.initial_state(frame @ np.array([0.5, 0.5, 1.0]))
    with pytest.raises(SubIterationError) as error:
        solver.step(state)
    assert error.value.step == 1
    assert error.value.iterations == 1


def test_peclet_limit_is_enforced(ellipsoid):
    solver = make_solver(ellipsoid, [5.54, 6.73, 6.76], peclet_limit=1e-6)
    omega = np.zeros(3)
    u = zero_moment_field(solver.assembler, seed=1)
    with pytest.raises(PecletLimitError):
        solver.liquid_step(u, omega, u)


def test_previous_step_relaxation_converges(ellipsoid):
    solver = make_solver(ellipsoid, [5.54, 6.73, 6.76], relax_against='previous_step')
    omega = solver.total_inertia.frame @ np.array([0.2, 0.1, 1.5])
    state = solver.step(solver.initial_state(omega))
    assert state.step == 1
    assert np.all(np.isfinite(state.body.omega))
    assert np.linalg.norm(state.body.omega - omega) < 0.1 * np.linalg.norm(omega)


def test_liquid_step_response_is_linear_in_forcing(ellipsoid_solver):
    spaces = ellipsoid_solver.spaces
    zero_u = np.zeros(spaces.n_velocity)
    omega = np.zeros(3)
    forcing = ellipsoid_solver.assembler.vector_mass @ zero_moment_field(ellipsoid_solver.assembler, seed=4)
    rest, _ = ellipsoid_solver.liquid_step(zero_u, omega, zero_u)
    single, _ = ellipsoid_solver.liquid_step(zero_u, omega, zero_u, forcing=forcing)
    double, _ = ellipsoid_solver.liquid_step(zero_u, omega, zero_u, forcing=2.0 * forcing)
    assert np.abs(rest.u).max() == 0.0
    assert np.abs(single.u).max() > 0
    assert np.abs(single.u[spaces.boundary_dofs]).max() == 0.0
    np.testing.assert_allclose(double.u, 2.0 * single.u, rtol=1e-9, atol=1e-14)


def test_warm_start_from_converged_step_is_a_fixed_point(ellipsoid_solver):
    state = ellipsoid_solver.initial_state(ellipsoid_solver.total_inertia.frame @ np.array([0.4, 0.3, 2.0]))
    converged = ellipsoid_solver.step(state)
    assert converged.subiterations > 1
    again = ellipsoid_solver.step(state, warm_start=converged)
    tolerance = ellipsoid_solver.settings.tolerance
    assert np.linalg.norm(again.body.omega - converged.body.omega) < 2 * tolerance
    assert again.subiterations < converged.subiterations


@pytest.mark.slow
def test_stronger_relaxation_needs_more_subiterations(ellipsoid):
    counts = {}
    for sigma in (0.05, 0.5):
        solver = make_solver(ellipsoid, [5.54, 6.73, 6.76], relaxation=sigma, tolerance=1e-6, max_subiters=1000)
        state = solver.initial_state(solver.total_inertia.frame @ np.array([0.4, 0.3, 2.0]))
        counts[sigma] = solver.step(state).subiterations
    assert counts[0.05] > counts[0.5]


def test_liquid_step_is_first_order_in_time(ellipsoid):
    omega = np.zeros(3)
    errors = []
    for time_step in (0.1, 0.05):
        solver = make_solver(ellipsoid, [5.54, 6.73, 6.76], time_step=time_step)
        assembler = solver.assembler
        # u(t) = e^{-t} g with g solenoidal and zero on the wall; the forcing makes it exact in space
        g = radial_profile_velocity(assembler, [0.3, -0.2, 1.0], ellipsoid_radius([1.2, 1.0, 0.8]))
        mass = solver.rho * assembler.vector_mass
        residual = assembler.viscous_matrix(solver.mu) @ g - mass @ g
        u, still = g, np.zeros_like(g)
        steps = int(round(1.0 / time_step))
        for n in range(1, steps + 1):
            flow, _ = solver.liquid_step(u, omega, still, forcing=np.exp(-n * time_step) * residual)
            u = flow.u
        error = u - np.exp(-1.0) * g
        errors.append(np.sqrt(error @ (mass @ error)))
    assert 1.6 <= errors[0] / errors[1] <= 2.4
