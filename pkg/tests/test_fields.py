import numpy as np
import pytest

from bernstein_lab.core.exceptions import ConfigError, MissingSecondDerivatives
from bernstein_lab.services.fields import (ClosedFormField, DiscreteField, affine, log_balanced, parse_field,
                                           product, scherk, sublinear)
from bernstein_lab.services.mesh import square_mesh


@pytest.mark.parametrize("field", [product(), scherk(), log_balanced(), sublinear()], ids=lambda f: f.name)
def test_closed_form_derivatives(field):
    points = np.array([[0.3, -0.2], [-0.5, 0.7], [0.1, 0.1]])
    step = 1e-6
    for k in range(2):
        e = np.zeros(2)
        e[k] = step
        fd = (field.value(points + e) - field.value(points - e)) / (2 * step)
        assert np.allclose(fd, field.gradient(points)[:, k], rtol=1e-7, atol=1e-8)
        fd = (field.gradient(points + e) - field.gradient(points - e)) / (2 * step)
        assert np.allclose(fd, field.hessian(points)[:, :, k], rtol=1e-6, atol=1e-7)


def test_missing_hessian():
    field = ClosedFormField("no-hessian", value=lambda x: x[..., 0], gradient=lambda x: np.ones_like(x))
    assert not field.has_hessian
    with pytest.raises(MissingSecondDerivatives):
        field.hessian(np.zeros((1, 2)))


def test_affine_interpolant_is_exact():
    mesh = square_mesh(1.0, 0.25)
    field = DiscreteField.interpolate(affine(3.0, -2.0, 7.0), mesh)
    assert np.allclose(field.element_gradients(), [3.0, -2.0])
    points = np.array([[0.1, 0.2], [-0.73, 0.5]])
    assert np.allclose(field.value(points), 3.0 * points[:, 0] - 2.0 * points[:, 1] + 7.0)
    assert np.allclose(field.element_hessians, 0.0, atol=1e-10)


def test_outside_points_are_nan():
    field = DiscreteField.interpolate(product(), square_mesh(1.0, 0.5))
    assert np.isnan(field.value(np.array([[3.0, 0.0]]))).all()
    assert np.isnan(field.gradient(np.array([[3.0, 0.0]]))).all()


def test_product_recovery_exact_at_interior_nodes():
    mesh = square_mesh(1.0, 0.25)
    field = DiscreteField.interpolate(product(), mesh)
    interior = mesh.interior_nodes
    expected = np.stack([mesh.nodes[interior, 1], mesh.nodes[interior, 0]], axis=-1)
    assert np.allclose(field.recovered_gradient[interior], expected, atol=1e-12)

    mask = np.zeros(len(mesh.nodes), dtype=bool)
    mask[interior] = True
    inner_elements = mask[mesh.elements].all(axis=1)
    assert inner_elements.any()
    assert np.allclose(field.element_hessians[inner_elements], [[0.0, 1.0], [1.0, 0.0]], atol=1e-10)


def test_composed_field():
    matrix = np.array([[1.0, 2.0], [0.5, -1.0]])
    composed = product().composed(matrix)
    x = np.array([[0.3, 0.4]])
    y = x @ matrix.T
    assert composed.value(x) == pytest.approx(product().value(y))
    assert np.allclose(composed.gradient(x), product().gradient(y) @ matrix)


@pytest.mark.parametrize("spec, name", [
    ("affine:a=1,b=2,c=0", "affine:a=1,b=2,c=0"),
    ("affine:1,2", "affine:a=1,b=2,c=0"),
    ("product", "product"),
    ("scherk", "scherk"),
    ("sublinear", "sublinear"),
])
def test_parse_field(spec, name):
    assert parse_field(spec).name == name


def test_parse_field_rejects():
    with pytest.raises(ConfigError):
        parse_field("helicoid")
    with pytest.raises(ConfigError):
        parse_field("from-file:missing.csv")
