import numpy as np
import pytest

from bernstein_lab.core.exceptions import DomainError, NonNearlyLinear
from bernstein_lab.services import density as densities
from bernstein_lab.services import nitsche


def test_theta_closed_forms():
    t = np.logspace(0, 8, 50)
    assert np.allclose(nitsche.theta(densities.minimal_surface(), t), 1.0 / (t * (2.0 + t)), rtol=1e-10, atol=0)
    assert np.allclose(nitsche.theta(densities.power(2.0), t), 1.0 / (2.0 * t), rtol=1e-12, atol=0)
    assert nitsche.theta(densities.power(2.0), 1.0) == pytest.approx(0.5)


def test_dyadic_sums_for_quadratic_density():
    sums = nitsche.dyadic_sums(densities.power(2.0), 10)
    assert [k for k, _ in sums] == list(range(10))
    assert np.allclose([s for _, s in sums], 0.5 * np.log(2.0), rtol=1e-10)


@pytest.mark.parametrize("spec, classification", [
    ("minimal-surface", "converges"),
    ("power:s=1.5", "diverges"),
    ("power:s=2", "diverges"),
    ("power:s=3", "diverges"),
    ("nearly-linear", "diverges"),
    ("regularized:eps=0.1", "diverges"),
])
def test_dichotomy(spec, classification):
    report = nitsche.classify_divergence(densities.parse_density(spec))
    assert report.classification == classification
    assert len(report.dyadic_sums) == 20
    assert report.fit_residual <= 0.05


def test_model_for_each_growth():
    assert nitsche.classify_divergence(densities.minimal_surface()).fitted_model == "geometric-decay"
    assert nitsche.classify_divergence(densities.power(2.0)).fitted_model == "constant"
    assert nitsche.classify_divergence(densities.nearly_linear()).fitted_model == "harmonic"


@pytest.mark.parametrize("spec", ["minimal-surface", "power:s=1.5", "power:s=2", "power:s=3", "nearly-linear",
                                  "regularized:eps=0.1"])
def test_classification_stable_under_more_levels(spec):
    f = densities.parse_density(spec)
    shorter = nitsche.classify_divergence(f, levels=16)
    longer = nitsche.classify_divergence(f, levels=24)
    assert shorter.classification == longer.classification
    assert shorter.fitted_model == longer.fitted_model
    assert longer.t_max == 2.0 ** 24


@pytest.mark.parametrize("values, model", [
    (np.full(10, 0.7), "constant"),
    (3.0 * 0.5 ** np.arange(10, 20), "geometric-decay"),
    (2.0 / (np.arange(10, 20) + 3.0), "harmonic"),
])
def test_select_model_on_synthetic_tails(values, model):
    fits = nitsche.fit_tail_models(np.arange(10, 20), values)
    assert nitsche.select_model(fits) == model


def test_classify_arguments():
    f = densities.minimal_surface()
    with pytest.raises(DomainError):
        nitsche.classify_divergence(f, levels=4)
    with pytest.raises(DomainError):
        nitsche.classify_divergence(f, t_max=100.0, levels=10)


def test_theta_lower_bound_nearly_linear():
    report = nitsche.theta_lower_bound_check(densities.nearly_linear())
    assert report.holds
    c1, c2 = report.details["ratio_interval"]
    assert 0.5 < c1 <= c2 < 2.5
    assert report.constant > 0


def test_theta_lower_bound_requires_nearly_linear():
    with pytest.raises(NonNearlyLinear):
        nitsche.theta_lower_bound_check(densities.power(2.0))
    with pytest.raises(DomainError):
        nitsche.theta_lower_bound_check(densities.nearly_linear(), t_min=1.0)
