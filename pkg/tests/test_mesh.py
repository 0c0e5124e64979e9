import numpy as np
import pytest

from bernstein_lab.core.exceptions import ConfigError, DegenerateDomain
from bernstein_lab.services.mesh import build_mesh, disk_mesh, mesh_from_points, square_mesh


def test_unit_cell_square():
    mesh = square_mesh(1.0, 1.0)
    assert len(mesh.nodes) == 9
    assert len(mesh.elements) == 8
    assert len(mesh.boundary_nodes) == 8
    assert mesh.interior_nodes.tolist() == [4]


def test_square_element_count():
    mesh = square_mesh(2.0, 0.1)
    assert len(mesh.elements) == 3200
    assert mesh.areas.sum() == pytest.approx(16.0)


@pytest.mark.parametrize("mesh", [square_mesh(1.0, 0.1), disk_mesh(1.0, 0.2), disk_mesh(3.0, 0.5)],
                         ids=["square", "disk", "coarse-disk"])
def test_mesh_quality(mesh):
    assert np.all(mesh.signed_areas > 0)
    assert mesh.edge_lengths().max() <= 1.5 * mesh.h
    assert np.allclose(mesh.shape_gradients.sum(axis=1), 0.0, atol=1e-10)


def test_disk_mesh_lies_in_disk():
    mesh = disk_mesh(2.0, 0.25)
    r = np.linalg.norm(mesh.nodes, axis=-1)
    assert r.max() <= 2.0 * (1 + 1e-12)
    assert np.allclose(r[mesh.boundary_nodes], 2.0)
    assert np.all(r[mesh.interior_nodes] < 2.0 - 1e-9)
    assert mesh.areas.sum() <= np.pi * 4.0
    assert mesh.areas.sum() == pytest.approx(np.pi * 4.0, rel=0.02)


def test_square_boundary_nodes():
    mesh = square_mesh(1.0, 0.5)
    assert len(mesh.boundary_nodes) == 16
    assert np.all(np.isclose(np.abs(mesh.nodes[mesh.boundary_nodes]), 1.0).any(axis=1))


@pytest.mark.parametrize("domain, h", [("square:L=-1", 0.1), ("square:L=1", 0.0), ("disk:R=0", 0.1)])
def test_degenerate_domain(domain, h):
    with pytest.raises(DegenerateDomain):
        build_mesh(domain, h)


def test_unknown_domain():
    with pytest.raises(ConfigError):
        build_mesh("annulus:R=1", 0.1)


def test_build_mesh_kinds():
    assert build_mesh("square:L=1", 0.5).domain == "square:L=1"
    assert build_mesh("polygonal-disk:R=1", 0.5).domain == "disk:R=1"


def test_mesh_from_points_boundary():
    axis = np.linspace(0.0, 1.0, 5)
    xx, yy = np.meshgrid(axis, axis)
    points = np.stack([xx.ravel(), yy.ravel()], axis=-1)
    mesh = mesh_from_points(points)
    assert len(mesh.boundary_nodes) == 16
    assert mesh.areas.sum() == pytest.approx(1.0)


def test_mapped_mesh_keeps_orientation():
    mesh = square_mesh(1.0, 0.5)
    reflected = mesh.mapped(np.array([[1.0, 0.0], [0.0, -1.0]]))
    assert np.all(reflected.signed_areas > 0)
    assert reflected.areas.sum() == pytest.approx(4.0)
