import math

import numpy as np
import pytest

from cavity_errors import MeshValidationError, RefinementLimitError
from meshing.base_mesh import Mesh, mesh_measures
from meshing.cylinder_mesher import disk_triangulation, generate_cylinder_mesh
from meshing.ellipsoid_mesher import generate_ellipsoid_mesh, icosahedral_ball


@pytest.fixture(scope="module")
def ball():
    return generate_ellipsoid_mesh([1.0, 1.0, 1.0], 0)


def unit_tet():
    vertices = np.array([[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    return vertices, np.array([[0, 1, 2, 3]])


def test_icosahedral_template_is_positively_oriented():
    vertices, tets = icosahedral_ball()
    assert len(vertices) == 13
    assert len(tets) == 20
    mesh = Mesh(vertices, tets)
    assert np.all(mesh.volumes > 0)


def test_ball_refinement_zero_has_expected_size(ball):
    assert ball.n_tets == 1280
    assert len(ball.boundary_facets) == 320


def test_ball_boundary_vertices_lie_on_sphere(ball):
    radii = np.linalg.norm(ball.vertices[ball.boundary_vertices], axis=1)
    np.testing.assert_allclose(radii, 1.0, rtol=1e-12)


def test_ball_volume_is_inscribed(ball):
    measures = mesh_measures(ball)
    exact = 4.0 / 3.0 * math.pi
    assert measures['volume'] < exact
    assert measures['volume'] == pytest.approx(exact, rel=0.05)
    assert measures['divergence_volume'] == pytest.approx(measures['volume'], rel=1e-12)
    assert np.linalg.norm(measures['centroid']) < 1e-12
    assert measures['min_tet_volume'] > 0


def test_ellipsoid_scales_the_ball(ball):
    ellipsoid = generate_ellipsoid_mesh([1.2, 1.0, 0.8], 0)
    assert ellipsoid.n_tets == ball.n_tets
    assert mesh_measures(ellipsoid)['volume'] == pytest.approx(0.96 * mesh_measures(ball)['volume'], rel=1e-12)
    x = ellipsoid.vertices[ellipsoid.boundary_vertices]
    np.testing.assert_allclose((x[:, 0] / 1.2) ** 2 + x[:, 1] ** 2 + (x[:, 2] / 0.8) ** 2, 1.0, rtol=1e-12)


def test_ellipsoid_refinement_limit():
    with pytest.raises(RefinementLimitError):
        generate_ellipsoid_mesh([1.0, 1.0, 1.0], 4)
    with pytest.raises(RefinementLimitError):
        generate_ellipsoid_mesh([1.0, 1.0, 1.0], -1)


def test_ellipsoid_rejects_bad_semi_axes():
    with pytest.raises(MeshValidationError):
        generate_ellipsoid_mesh([1.0, 0.0, 1.0], 0)


def test_disk_triangulation_covers_the_rings():
    points, triangles = disk_triangulation(1.0, 3)
    assert len(points) == 1 + 6 + 12 + 18
    # Euler: a triangulated disk with n points and b boundary points has 2n - b - 2 triangles
    assert len(triangles) == 2 * len(points) - 18 - 2


def test_cylinder_volume_and_extent():
    mesh = generate_cylinder_mesh(1.0, 2.0, 1)
    measures = mesh_measures(mesh)
    exact = math.pi * 2.0
    assert measures['volume'] < exact
    assert measures['volume'] == pytest.approx(exact, rel=0.02)
    assert measures['divergence_volume'] == pytest.approx(measures['volume'], rel=1e-12)
    assert np.linalg.norm(mesh.vertices[:, :2], axis=1).max() == pytest.approx(1.0)
    assert mesh.vertices[:, 2].min() == pytest.approx(-1.0)
    assert mesh.vertices[:, 2].max() == pytest.approx(1.0)


def test_cylinder_refinement_limit():
    with pytest.raises(RefinementLimitError):
        generate_cylinder_mesh(1.0, 1.0, 5)


def test_inverted_tet_is_rejected():
    vertices, tets = unit_tet()
    with pytest.raises(MeshValidationError, match="non-positive volume"):
        Mesh(vertices, tets[:, [0, 2, 1, 3]])


def test_out_of_range_index_is_rejected():
    vertices, _ = unit_tet()
    with pytest.raises(MeshValidationError, match="out of range"):
        Mesh(vertices, np.array([[0, 1, 2, 4]]))


def test_open_boundary_is_rejected():
    vertices, tets = unit_tet()
    mesh = Mesh(vertices, tets)
    with pytest.raises(MeshValidationError, match="not closed"):
        Mesh(vertices, tets, mesh.boundary_facets[:3])


def test_inward_facet_is_rejected():
    vertices, tets = unit_tet()
    facets = Mesh(vertices, tets).boundary_facets.copy()
    facets[0] = facets[0][[0, 2, 1]]
    with pytest.raises(MeshValidationError, match="inward"):
        Mesh(vertices, tets, facets)


def test_edges_and_boundary_edges_of_single_tet():
    vertices, tets = unit_tet()
    mesh = Mesh(vertices, tets)
    assert len(mesh.edges) == 6
    assert len(mesh.boundary_edges) == 6
    assert mesh.tet_edges.shape == (1, 6)


def test_ball_volume_and_area_converge_under_refinement():
    measures = [mesh_measures(generate_ellipsoid_mesh([1.0, 1.0, 1.0], k)) for k in range(3)]
    volume_errors = [abs(m['volume'] - 4.0 / 3.0 * math.pi) for m in measures]
    area_errors = [abs(m['boundary_area'] - 4.0 * math.pi) for m in measures]
    assert volume_errors[0] > volume_errors[1] > volume_errors[2]
    assert area_errors[0] > area_errors[1] > area_errors[2]
    assert measures[2]['boundary_area'] == pytest.approx(4.0 * math.pi, rel=5e-3)
    assert measures[2]['volume'] == pytest.approx(4.0 / 3.0 * math.pi, rel=1e-2)


def test_cylinder_with_sqrt3_height_has_expected_volume():
    height = math.sqrt(3.0)
    measures = mesh_measures(generate_cylinder_mesh(1.0, height, 1))
    assert measures['volume'] == pytest.approx(math.pi * height, rel=0.05)
    assert measures['divergence_volume'] == pytest.approx(measures['volume'], rel=1e-12)
