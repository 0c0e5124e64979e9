import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bernstein_lab.core.exceptions import NoConvergence, OutOfRange
from bernstein_lab.services import density as densities
from bernstein_lab.services import solver
from bernstein_lab.services.fields import DiscreteField, affine, product, scherk
from bernstein_lab.services.mesh import square_mesh

finite = dict(allow_nan=False, allow_infinity=False)


def test_energy_examples():
    mesh = square_mesh(1.0, 0.1)
    zero = DiscreteField(mesh, np.zeros(len(mesh.nodes)))
    assert solver.energy(densities.minimal_surface(), zero) == pytest.approx(4.0, rel=1e-12)

    ramp = DiscreteField.interpolate(affine(1.0, 0.0), mesh)
    assert solver.energy(densities.power(2.0), ramp) == pytest.approx(8.0, rel=1e-12)


@pytest.mark.parametrize("h", [0.5, 0.1, 0.05])
def test_product_energy_converges(h):
    # Ошибка интерполяции дает ровно 4h^2/3 на этой сетке
    mesh = square_mesh(1.0, h)
    field = DiscreteField.interpolate(product(), mesh)
    assert solver.energy(densities.power(2.0), field) == pytest.approx(4.0 + 8.0 / 3.0 + 4.0 * h ** 2 / 3.0,
                                                                       rel=1e-12)


def test_product_is_discrete_solution_for_quadratic_density():
    mesh = square_mesh(1.0, 0.1)
    field = DiscreteField.interpolate(product(), mesh)
    assert solver.euler_residual(densities.power(2.0), field) <= 1e-10


def test_gradient_matches_finite_differences(rng):
    f = densities.minimal_surface()
    mesh = square_mesh(1.0, 0.25)
    values = 0.3 * rng.normal(size=len(mesh.nodes))
    assembly = solver.assemble(f, mesh, values)
    step = 1e-6
    for i in rng.choice(len(mesh.nodes), size=20, replace=False):
        e = np.zeros(len(mesh.nodes))
        e[i] = step
        plus = solver.assemble(f, mesh, values + e, with_hessian=False).energy
        minus = solver.assemble(f, mesh, values - e, with_hessian=False).energy
        fd = (plus - minus) / (2 * step)
        assert abs(fd - assembly.gradient[i]) <= 1e-5 * max(abs(assembly.gradient[i]), 1e-3)


def test_hessian_is_symmetric(rng):
    mesh = square_mesh(1.0, 0.25)
    values = rng.normal(size=len(mesh.nodes))
    hessian = solver.assemble(densities.nearly_linear(), mesh, values).hessian
    assert abs(hessian - hessian.T).max() <= 1e-12 * abs(hessian).max()


def test_affine_reproduction(builtin_density, rng):
    # 65 x 65 узлов
    mesh = square_mesh(1.0, 2.0 / 64)
    assert len(mesh.nodes) == 65 * 65
    for a, b, c in rng.uniform(-5, 5, size=(10, 3)):
        target = affine(a, b, c)
        field, report = solver.minimize(builtin_density, mesh, target, tol=1e-10)
        assert report.converged
        assert report.iterations <= 2
        assert np.max(np.abs(field.values - target.value(mesh.nodes))) <= 1e-10
        assert solver.euler_residual(builtin_density, field) <= 1e-10


def test_nearly_linear_solve_reports():
    mesh = square_mesh(2.0, 0.1)
    field, report = solver.minimize(densities.nearly_linear(), mesh, product(), tol=1e-8)
    assert report.converged
    assert report.residual <= 1e-8
    history = np.array(report.energy_history)
    assert np.all(np.diff(history) <= 1e-10 * (np.abs(history[:-1]) + 1))
    assert report.large_gradient_elements == 0
    assert report.nodes == len(mesh.nodes)
    boundary = mesh.boundary_nodes
    assert np.allclose(field.values[boundary], product().value(mesh.nodes[boundary]))


def test_no_convergence_keeps_best_iterate():
    mesh = square_mesh(1.2, 0.2)
    with pytest.raises(NoConvergence) as info:
        solver.minimize(densities.minimal_surface(), mesh, scherk(), tol=1e-14, max_iters=1)
    assert info.value.best_field is not None
    assert info.value.report.iterations == 1
    assert not info.value.report.converged


@pytest.mark.slow
def test_scherk_error_decreases():
    f = densities.minimal_surface()
    errors = []
    for h in (0.2, 0.1, 0.05):
        mesh = square_mesh(1.2, h)
        field, report = solver.minimize(f, mesh, scherk(), tol=1e-10)
        assert report.converged
        errors.append(np.max(np.abs(field.values - scherk().value(mesh.nodes))))
    assert errors[0] > errors[1] > errors[2]


def test_monotone_invert_minimal_surface():
    f = densities.minimal_surface()
    assert solver.monotone_invert(f, 0.0, 1.0 / np.sqrt(2.0)) == pytest.approx(1.0, abs=1e-12)
    assert solver.monotone_invert(f, 1.0, 0.0) == 0.0
    with pytest.raises(OutOfRange):
        solver.monotone_invert(f, 0.0, 1.0)
    with pytest.raises(OutOfRange):
        solver.monotone_invert(f, 0.0, -1.5)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=-10, max_value=10, **finite), st.floats(min_value=-0.99, max_value=0.99, **finite))
def test_monotone_invert_closed_form(a, c):
    y = solver.monotone_invert(densities.minimal_surface(), a, c)
    expected = c * np.sqrt(1.0 + a ** 2) / np.sqrt(1.0 - c ** 2)
    assert abs(y - expected) <= 1e-9 * max(1.0, abs(expected))


@pytest.mark.parametrize("a", [0.0, 1.0, 10.0])
def test_partial_derivative_is_increasing(builtin_density, a):
    y = np.linspace(-1e3, 1e3, 2001)
    points = np.stack([np.full_like(y, a), y], axis=-1)
    partial2 = builtin_density.gradient(points)[:, 1]
    assert np.all(np.diff(partial2) > 0)


def test_ode_profile_is_affine_solution():
    f = densities.power(2.0)
    profile = solver.ode_profile(f, 1.0, 3.0)
    # df/dp2 = 2 p2
    assert profile.gradient(np.zeros((1, 2)))[0] == pytest.approx([1.0, 1.5])
