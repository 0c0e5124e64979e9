import numpy as np
import pytest

from bernstein_lab.core.exceptions import ConfigError, SingularFrame, WeightInadmissible
from bernstein_lab.services import conditions
from bernstein_lab.services import density as densities
from bernstein_lab.services import solver
from bernstein_lab.services.caccioppoli import linear_rho
from bernstein_lab.services.fields import DiscreteField, affine, log_balanced, log_ridge, product, scherk
from bernstein_lab.services.mesh import square_mesh

PRODUCT_FAILURES = [
    "power-balance:m=0.5,K=10,dir=1",
    "power-balance:m=0.5,K=10,dir=2",
    "log-balance:K=5,dir=1",
    "log-balance:K=5,dir=2",
    "rho-pointwise:rho=log-shift",
]


@pytest.mark.parametrize("spec", PRODUCT_FAILURES)
def test_product_fails_balance(spec):
    check = conditions.parse_balance(spec)
    report = conditions.check_balance(product(), check, "disk:R=100")
    assert not report.holds
    point, lhs, rhs = report.witness
    assert lhs > rhs
    # Свидетель воспроизводится прямым вычислением
    again = conditions.evaluate_balance(product(), check, point)
    assert again[0] == pytest.approx(lhs)
    assert again[1] == pytest.approx(rhs)
    assert again[0] > again[1]


def test_product_witness_on_axis():
    report = conditions.check_balance(product(), conditions.parse_balance("power-balance:m=0.5,K=10"), 100.0)
    x1, x2 = report.witness_point
    assert abs(x1) < 1e-6
    assert abs(x2) == pytest.approx(100.0)
    assert report.constant == pytest.approx(100.0, rel=1e-6)


def test_balance_monotone_in_constant():
    spec = conditions.parse_balance("power-balance:m=0.5,K=10")
    measured = conditions.check_balance(product(), spec, 100.0).constant
    for K in (measured * 1.01, measured * 2, measured * 10):
        relaxed = conditions.BalanceSpec("power-balance", K=K, m=0.5)
        assert conditions.check_balance(product(), relaxed, 100.0).holds


@pytest.mark.parametrize("spec", PRODUCT_FAILURES + ["rho-pointwise:rho=sqrt,c=100,dir=2"])
def test_affine_passes(spec):
    report = conditions.check_balance(affine(1.0, 2.0, 7.0), conditions.parse_balance(spec), 100.0)
    assert report.holds
    assert np.isfinite(report.constant)
    assert report.witness is None


def test_affine_power_balance_constant():
    report = conditions.check_balance(affine(3.0, -2.0, 7.0), conditions.parse_balance("power-balance:m=0.5,K=10"))
    assert report.constant == pytest.approx(3.0 / (np.sqrt(2.0) + 1.0))


def test_log_balanced_field_passes():
    spec = conditions.parse_balance("power-balance:m=0.5,K=10")
    assert conditions.check_balance(log_balanced(), spec, 1000.0).holds
    assert conditions.check_balance(log_ridge(), spec, 1000.0).holds


def test_balance_spec_validation():
    with pytest.raises(ConfigError) as info:
        conditions.BalanceSpec("power-balance", K=-1.0, m=1.5)
    assert set(info.value.fields) == {"K", "m"}
    with pytest.raises(ConfigError):
        conditions.parse_balance("harnack:K=1")
    with pytest.raises(ConfigError):
        conditions.parse_region("square:L=1")


def test_inadmissible_rho():
    spec = conditions.BalanceSpec("rho-pointwise", rho=linear_rho())
    with pytest.raises(WeightInadmissible):
        conditions.check_balance(affine(1.0, 0.0), spec)


def test_average_condition():
    assert conditions.check_rho_average(affine(3.0, -2.0)).holds
    report = conditions.check_rho_average(product())
    assert not report.holds
    sequence = report.details["sequence"]
    assert sequence[-1] > sequence[0]


def test_pointwise_condition_defaults():
    assert conditions.check_rho_pointwise(affine(1.0, 2.0)).holds
    assert not conditions.check_rho_pointwise(product()).holds


def test_affinity_measure():
    assert conditions.affinity_measure(affine(3.0, -2.0, 7.0), 10.0) < 1e-12
    assert conditions.affinity_measure(product(), 1.0) > 0.1
    assert conditions.affinity_measure(scherk(), 1.0) > 1e-3
    mesh = square_mesh(1.0, 0.25)
    assert conditions.affinity_measure(DiscreteField.interpolate(affine(1.0, 1.0), mesh)) < 1e-12


# Замена направлений

def test_identity_frame():
    frame = conditions.parse_frame([1.0, 0.0], [0.0, 1.0])
    f = densities.minimal_surface()
    transformed = conditions.direction_transform(frame, f)
    p = np.array([[0.3, -2.0], [10.0, 4.0]])
    assert np.allclose(transformed.eval(p), f.eval(p))
    u = conditions.transform_field(frame, product())
    assert np.allclose(u.value(p), product().value(p))


def test_diagonal_frame():
    frame = conditions.parse_frame([1.0, 1.0], [1.0, -1.0])
    assert np.allclose(frame.gram, [[2.0, 0.0], [0.0, 2.0]])
    u = conditions.transform_field(frame, product())
    x = np.array([[0.2, 0.3]])
    step = 1e-6
    fd = (u.value(x + [step, 0.0]) - u.value(x - [step, 0.0])) / (2 * step)
    # d_1 u~(x) = d_{E1} u(T x)
    y = x @ frame.matrix.T
    expected = product().gradient(y) @ np.array([1.0, 1.0])
    assert fd == pytest.approx(expected, rel=1e-6)


def test_directional_identity_random_frames(rng):
    for _ in range(10):
        E = rng.uniform(-2, 2, size=(2, 2))
        if abs(np.linalg.det(E)) < 0.5:
            continue
        frame = conditions.parse_frame(E[:, 0], E[:, 1])
        x = rng.uniform(-1, 1, size=(5, 2))
        u = conditions.transform_field(frame, product())
        assert np.allclose(u.gradient(x), frame.directional(product().gradient(x @ frame.matrix.T)), rtol=1e-12)


def test_inverse_frame_restores_density(rng):
    frame = conditions.parse_frame([1.0, 0.5], [0.2, 1.5])
    f = densities.nearly_linear()
    restored = conditions.direction_transform(frame.inverse(), conditions.direction_transform(frame, f))
    p = rng.uniform(-10, 10, size=(20, 2))
    assert np.allclose(restored.eval(p), f.eval(p), rtol=1e-10)


def test_singular_frame():
    with pytest.raises(SingularFrame):
        conditions.parse_frame([1.0, 2.0], [2.0, 4.0])


def test_transformed_solution_solves_transformed_problem():
    f = densities.minimal_surface()
    tol = 1e-10
    mesh = square_mesh(1.0, 0.25)
    solution, _ = solver.minimize(f, mesh, scherk(), tol=tol)
    frame = conditions.parse_frame([1.0, 0.5], [0.2, 1.5])
    tilde = conditions.transform_field(frame, solution)
    residual = solver.euler_residual(conditions.direction_transform(frame, f), tilde)
    assert residual <= 10 * tol * max(1.0, 1.0 / abs(frame.det))


def test_frame_details_in_report():
    frame = conditions.parse_frame([1.0, 0.0], [0.0, 2.0])
    report = conditions.check_balance(log_balanced(), conditions.parse_balance("log-balance:K=5,dir=2"), 10.0, frame)
    assert report.details["extension"] is True
    assert report.details["frame"] == {"E1": [1.0, 0.0], "E2": [0.0, 2.0]}
