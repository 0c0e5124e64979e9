import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from bernstein_lab.core.exceptions import ConfigError, DegenerateProfile, DomainError
from bernstein_lab.services import density as densities

finite = dict(allow_nan=False, allow_infinity=False)


def test_minimal_surface_closed_forms():
    f = densities.minimal_surface()
    assert f.eval(np.array([0.0, 0.0])) == 1.0
    assert f.eval(np.array([3.0, 4.0])) == pytest.approx(np.sqrt(26.0))
    assert np.allclose(f.gradient(np.array([3.0, 4.0])), np.array([3.0, 4.0]) / np.sqrt(26.0))
    form = f.hessian(np.array([0.0, 0.0]))
    assert form.as_matrix() == pytest.approx(np.eye(2))


def test_power_two_has_constant_hessian():
    f = densities.power(2.0)
    points = np.array([[0.0, 0.0], [1.0, -2.0], [1e3, 5.0]])
    assert np.allclose(f.hessian_matrix(points), 2.0 * np.eye(2))


def test_batched_evaluation_matches_pointwise(builtin_density, rng):
    points = rng.normal(size=(7, 2)) * 5
    batch = builtin_density.hessian_matrix(points)
    for p, m in zip(points, batch):
        assert np.allclose(builtin_density.hessian_matrix(p), m, rtol=1e-13)
    assert builtin_density.eval(points).shape == (7,)


def test_radial_lambda_values():
    assert densities.radial_lambda(densities.minimal_surface(), 1.0) == pytest.approx(-0.5)
    assert densities.radial_lambda(densities.power(2.0), 4.0) == pytest.approx(0.0, abs=1e-15)
    t = np.array([1.0, 10.0, 1e4])
    assert np.allclose(densities.radial_lambda(densities.minimal_surface(), t), -1.0 / (1.0 + t))


def test_radial_lambda_domain():
    f = densities.minimal_surface()
    with pytest.raises(DegenerateProfile):
        densities.radial_lambda(f, 0.0)
    with pytest.raises(DomainError):
        densities.radial_lambda(f, -1.0)


@pytest.mark.parametrize("spec, kind, parameter", [
    ("minimal-surface", "minimal-surface", None),
    ("power:s=1.5", "power", 1.5),
    ("power:3", "power", 3.0),
    ("nearly-linear", "nearly-linear", None),
    ("regularized:eps=0.1", "regularized", 0.1),
])
def test_parse_density(spec, kind, parameter):
    f = densities.parse_density(spec)
    assert f.kind == kind
    if kind == "power":
        assert f.s == parameter
    if kind == "regularized":
        assert f.eps == parameter


@pytest.mark.parametrize("spec", ["power:s=1", "power", "regularized:eps=0", "cubic", ""])
def test_parse_density_rejects(spec):
    with pytest.raises(ConfigError):
        densities.parse_density(spec)


def test_hypothesis_grid_covers_range():
    points, directions = densities.hypothesis_grid(1e4)
    r = np.linalg.norm(points, axis=-1)
    assert r.min() == 0.0
    assert r.max() == pytest.approx(1e4)
    assert points.shape == directions.shape
    assert np.all(np.linalg.norm(directions, axis=-1) > 0)


def test_ellipticity_holds_for_builtins(builtin_density):
    points, directions = densities.hypothesis_grid()
    report = densities.validate_ellipticity(builtin_density, points, directions)
    assert report.holds
    assert report.witness is None


def test_ellipticity_fails_for_nonconvex_profile():
    f = densities.custom_radial(lambda r: r ** 2 - r ** 4, lambda r: 2 * r - 4 * r ** 3,
                                lambda r: 2 - 12 * r ** 2, name="nonconvex")
    points, directions = densities.hypothesis_grid(10.0)
    report = densities.validate_ellipticity(f, points, directions)
    assert not report.holds
    point, lhs, rhs = report.witness
    assert lhs <= rhs
    assert np.linalg.norm(point) > 0.4


def test_minimal_surface_linear_bound():
    points, _ = densities.hypothesis_grid()
    report = densities.validate_linear_bound(densities.minimal_surface(), points)
    assert report.holds
    assert report.constant <= 2.0
    assert report.constant == pytest.approx(np.sqrt(2.0), rel=1e-3)


def test_nearly_linear_bounds():
    f = densities.nearly_linear()
    points, directions = densities.hypothesis_grid()
    nearly = densities.validate_nearly_linear_bound(f, points, directions)
    assert nearly.holds
    assert nearly.constant == pytest.approx(2.0 / np.log(2.0), rel=1e-6)

    linear = densities.validate_linear_bound(f, points)
    assert not linear.holds
    assert linear.witness is not None


def test_power_two_fails_both_bounds():
    f = densities.power(2.0)
    points, directions = densities.hypothesis_grid()
    assert not densities.validate_nearly_linear_bound(f, points, directions).holds
    assert not densities.validate_linear_bound(f, points).holds


def test_radial_decay():
    assert densities.validate_radial_decay(densities.minimal_surface(), 3.0).holds
    assert not densities.validate_radial_decay(densities.nearly_linear(), 3.0).holds


def test_fit_windows_start_at_unit_radius():
    # Большой пик g'' у нуля и медленный рост (1+r)^0.1 на бесконечности
    f = densities.custom_radial(
        lambda r: 50.0 * r - 2.5 * (1.0 - np.exp(-20.0 * r)) + (r - (1.0 - (1.0 + r) ** -0.9) / 0.9) / 1.9,
        lambda r: 50.0 * (1.0 - np.exp(-20.0 * r)) + (1.0 - (1.0 + r) ** -1.9) / 1.9,
        lambda r: 1000.0 * np.exp(-20.0 * r) + (1.0 + r) ** -2.9,
        name="peaked",
    )
    radii = densities.hypothesis_radii(1e6)
    ratios = (1000.0 * np.exp(-20.0 * radii) + (1.0 + radii) ** -2.9) * (1.0 + radii) ** 3
    # С окнами от нуля пик у r = 0 скрывает рост
    assert np.max(ratios[radii <= 1e5]) == np.max(ratios)

    report = densities.validate_radial_decay(f, 3.0)
    assert not report.holds
    assert report.constant == pytest.approx(1001.0)
    assert report.details["inner_constant"] == pytest.approx((1.0 + 1e5) ** 0.1, rel=1e-6)
    assert report.details["outer_constant"] == pytest.approx((1.0 + 1e6) ** 0.1, rel=1e-6)
    point, lhs, rhs = report.witness
    assert point[0] == pytest.approx(1e6)
    assert lhs > rhs


def test_growth_ratio():
    f = densities.nearly_linear()
    assert densities.growth_ratio(f, "nearly-linear").holds
    assert not densities.growth_ratio(f, "linear").holds
    with pytest.raises(ConfigError):
        densities.growth_ratio(f, "quadratic")


def test_derivative_check_passes(builtin_density, rng):
    report = densities.derivative_check(builtin_density, rng)
    assert report.holds, report.details


def test_derivative_check_detects_wrong_hessian(rng):
    # g'' отличается от производной g' в два раза
    f = densities.custom_radial(lambda r: r ** 4 / 4, lambda r: r ** 3, lambda r: 6 * r ** 2, name="wrong")
    assert not densities.derivative_check(f, rng, n=20, p_max=10.0).holds


def test_radial_consistency(builtin_density):
    points, _ = densities.hypothesis_grid()
    report = densities.radial_consistency(builtin_density, points)
    assert report.holds, report.constant


def test_lambda_matches_finite_differences(builtin_density):
    # t lambda(t) = 2 d ln f'(t) / d ln t, f'(t) = g'(sqrt t)/(2 sqrt t)
    radial = densities.require_profile(builtin_density)
    t = np.logspace(0.0, 6.0, 25)
    step = 1e-4

    def log_f_prime(s):
        return np.log(radial.dg(np.sqrt(s)) / (2.0 * np.sqrt(s)))

    fd = (log_f_prime(t * np.exp(step)) - log_f_prime(t * np.exp(-step))) / step
    assert np.allclose(t * densities.radial_lambda(builtin_density, t), fd, rtol=0.0, atol=1e-6)


def unit(vector):
    return vector / np.linalg.norm(vector, axis=-1, keepdims=True)


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from(["minimal-surface", "power:s=1.5", "power:s=3", "nearly-linear", "regularized:eps=0.1"]),
    st.tuples(st.floats(min_value=-1e3, max_value=1e3, **finite), st.floats(min_value=-1e3, max_value=1e3, **finite)),
    st.tuples(st.floats(min_value=-10, max_value=10, **finite), st.floats(min_value=-10, max_value=10, **finite)),
    st.tuples(st.floats(min_value=-10, max_value=10, **finite), st.floats(min_value=-10, max_value=10, **finite)),
)
def test_form_cauchy_schwarz(spec, p, v, w):
    v, w = np.array(v), np.array(w)
    assume(np.linalg.norm(v) > 1e-6 and np.linalg.norm(w) > 1e-6)
    form = densities.parse_density(spec).hessian(np.array(p))
    v, w = unit(v), unit(w)
    bound = np.sqrt(form(v) * form(w))
    assert abs(form(v, w)) <= bound * (1 + 1e-12) + 1e-12 * form.max_eigenvalue


def test_form_cauchy_schwarz_batch(builtin_density):
    rng = np.random.default_rng(20240301)
    n = 10_000
    radii = 1e3 * rng.random(n)
    angles = 2.0 * np.pi * rng.random(n)
    p = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=-1)
    v = unit(rng.normal(size=(n, 2)))
    w = unit(rng.normal(size=(n, 2)))

    matrices = builtin_density.hessian_matrix(p)
    _, top = densities.form_eigenvalues(matrices)
    mixed = np.abs(densities.apply_form(matrices, v, w))
    bound = np.sqrt(densities.apply_form(matrices, v, v) * densities.apply_form(matrices, w, w))
    assert np.all(mixed <= bound * (1 + 1e-12) + 1e-12 * top)
