import numpy as np
import pytest

from analysis.derived import derive
from coupling.initial_data import (bounding_radius, cylinder_radius, ellipsoid_radius, profile_field,
                                   radial_profile, radial_profile_velocity, zero_momentum_velocity)
from fem.assembly import OperatorAssembler
from fem.fields import angular_moment
from fem.function_spaces import build_spaces
from meshing.cylinder_mesher import generate_cylinder_mesh
from meshing.ellipsoid_mesher import generate_ellipsoid_mesh
from rigid_body.inertia import InertiaTensor

SEMI_AXES = [1.2, 1.0, 0.8]
OMEGA = np.array([0.2, -0.1, 1.0])


@pytest.fixture(scope="module")
def assembler():
    return OperatorAssembler(build_spaces(generate_ellipsoid_mesh(SEMI_AXES, 0)))


def test_radial_profile_values():
    np.testing.assert_allclose(radial_profile([0.0, 0.5, 1.0]), [0.0, 0.5, 1.0], atol=1e-15)


def test_radial_profile_is_clipped():
    np.testing.assert_allclose(radial_profile([-1.0, 2.0]), [0.0, 1.0], atol=1e-15)


def test_ellipsoid_radius_is_one_on_the_wall(assembler):
    mesh = assembler.spaces.mesh
    radius = ellipsoid_radius(SEMI_AXES)
    np.testing.assert_allclose(radius(mesh.vertices[mesh.boundary_vertices]), 1.0, rtol=1e-12)
    assert radius(np.zeros((1, 3)))[0] == 0.0


def test_cylinder_radius_is_one_on_the_wall():
    mesh = generate_cylinder_mesh(1.0, 2.0, 0)
    radius = cylinder_radius(1.0, 2.0)
    np.testing.assert_allclose(radius(mesh.vertices[mesh.boundary_vertices]), 1.0, rtol=1e-12)


def test_bounding_radius_scales_to_farthest_vertex(assembler):
    vertices = assembler.spaces.mesh.vertices
    assert bounding_radius(vertices)(vertices).max() == pytest.approx(1.0)


def test_profile_field_vanishes_at_the_center(assembler):
    spaces = assembler.spaces
    field = spaces.nodal_values(profile_field(assembler, OMEGA, ellipsoid_radius(SEMI_AXES)))
    center = np.flatnonzero(np.linalg.norm(spaces.mesh.vertices, axis=1) == 0.0)
    assert len(center) == 1
    np.testing.assert_allclose(field[center[0]], 0.0, atol=1e-15)


def test_radial_profile_velocity_is_admissible(assembler):
    spaces = assembler.spaces
    v = radial_profile_velocity(assembler, OMEGA, ellipsoid_radius(SEMI_AXES))
    assert np.abs(v).max() > 0
    assert np.abs(v[spaces.boundary_dofs]).max() == 0.0
    assert np.abs(assembler.divergence @ v).max() <= 1e-10 * np.abs(v).max()
    # The liquid lags behind the rotation it is profiled on
    assert angular_moment(assembler, v) @ OMEGA < 0


def test_zero_momentum_velocity_cancels_total_momentum(assembler):
    spaces = assembler.spaces
    inertia = InertiaTensor(np.diag([5.54, 6.73, 6.76]))
    v = zero_momentum_velocity(assembler, OMEGA, inertia, 1.0, ellipsoid_radius(SEMI_AXES))
    assert np.abs(v[spaces.boundary_dofs]).max() == 0.0
    state = derive(assembler, spaces.rigid_field(OMEGA) + v, OMEGA, inertia, 1.0)
    scale = np.linalg.norm(inertia.matrix @ OMEGA)
    assert np.linalg.norm(state.angular_momentum) <= 1e-9 * scale
    np.testing.assert_allclose(state.omega_infinity, 0.0, atol=1e-9)
