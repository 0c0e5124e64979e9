"""
Плотности энергии f: R^2 -> R, их производные и численные проверки структурных гипотез.

Все встроенные плотности радиальные, f(p) = g(|p|), и задаются тройкой (g, g', g'').
Градиент и матрица Гессе восстанавливаются из профиля:

    Df(p)   = (g'(r)/r) p,
    D2f(p)  = (g'(r)/r) Id + (g''(r) - g'(r)/r) p p^T / r^2,   r = |p|.

Все функции векторизованы по последней оси (..., 2).
"""
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from typing import Callable, Optional, Tuple

import numpy as np

from bernstein_lab.core.config import Config
from bernstein_lab.core.exceptions import ConfigError, DegenerateProfile, DomainError, NonRadialDensity
from bernstein_lab.models.reports import ConditionReport
from bernstein_lab.services.functions import parse_spec, spec_float

ScalarFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class RadialProfile:
    """
    Радиальный профиль g(r), r >= 0, с первой и второй производными.

    dg_over_r - необязательная замкнутая формула для g'(r)/r, устойчивая при r -> 0.
    """
    g: ScalarFunction
    dg: ScalarFunction
    d2g: ScalarFunction
    dg_over_r: Optional[ScalarFunction] = None

    def tangential(self, r: np.ndarray) -> np.ndarray:
        """g'(r)/r с пределом g''(0) в нуле"""
        r = np.asarray(r, dtype=float)
        if self.dg_over_r is not None:
            return self.dg_over_r(r)
        safe = np.where(r > 1e-12, r, 1.0)
        return np.where(r > 1e-12, self.dg(safe) / safe, self.d2g(np.zeros_like(r)))

    def q(self, r: np.ndarray) -> np.ndarray:
        """r g''(r) / g'(r) = 1 + t lambda(t) при t = r^2"""
        r = np.asarray(r, dtype=float)
        return r * self.d2g(r) / self.dg(r)


@dataclass(frozen=True)
class HessianForm:
    """Симметричная квадратичная форма 2x2"""
    a11: float
    a12: float
    a22: float

    def __call__(self, v, w=None) -> float:
        v = np.asarray(v, dtype=float)
        w = v if w is None else np.asarray(w, dtype=float)
        return float(self.a11 * v[0] * w[0] + self.a12 * (v[0] * w[1] + v[1] * w[0]) + self.a22 * v[1] * w[1])

    def eigenvalues(self) -> Tuple[float, float]:
        mean = 0.5 * (self.a11 + self.a22)
        radius = float(np.hypot(0.5 * (self.a11 - self.a22), self.a12))
        return mean - radius, mean + radius

    @property
    def min_eigenvalue(self) -> float:
        return self.eigenvalues()[0]

    @property
    def max_eigenvalue(self) -> float:
        return self.eigenvalues()[1]

    def as_matrix(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a12, self.a22]])


def form_eigenvalues(matrices: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Собственные значения пачки симметричных форм (..., 2, 2) в замкнутом виде"""
    a11, a12, a22 = matrices[..., 0, 0], matrices[..., 0, 1], matrices[..., 1, 1]
    mean = 0.5 * (a11 + a22)
    radius = np.hypot(0.5 * (a11 - a22), a12)
    return mean - radius, mean + radius


def apply_form(matrices: np.ndarray, v: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Значения D2f(p)(v, w) для пачки форм и векторов"""
    return np.einsum('...i,...ij,...j->...', v, matrices, w)


class Density(ABC):
    """Плотность энергии на R^2"""
    spec: str = "density"

    @abstractmethod
    def eval(self, p) -> np.ndarray:
        ...

    @abstractmethod
    def gradient(self, p) -> np.ndarray:
        ...

    @abstractmethod
    def hessian_matrix(self, p) -> np.ndarray:
        ...

    @property
    def profile(self) -> Optional[RadialProfile]:
        return None

    def hessian(self, p) -> HessianForm:
        """Форма D2f(p) в одной точке"""
        m = self.hessian_matrix(np.asarray(p, dtype=float).reshape(2))
        return HessianForm(float(m[0, 0]), float(0.5 * (m[0, 1] + m[1, 0])), float(m[1, 1]))

    def __repr__(self) -> str:
        return f"<{type(self).__name__}({self.spec})>"


def _scalar(values: np.ndarray, p: np.ndarray):
    return float(values) if p.ndim == 1 else values


class DensityModel(Density):
    """
    Встроенная радиальная плотность.

    kind: minimal-surface | power | nearly-linear | regularized | custom-radial
    """

    def __init__(self, kind: str, radial: RadialProfile, s: float | None = None, eps: float | None = None,
                 spec: str | None = None):
        self.kind = kind
        self.s = s
        self.eps = eps
        self._profile = radial
        self.spec = spec or kind

    @property
    def profile(self) -> RadialProfile:
        return self._profile

    @property
    def is_nearly_linear(self) -> bool:
        return self.kind in ("nearly-linear", "regularized")

    def eval(self, p):
        p = np.asarray(p, dtype=float)
        r = np.linalg.norm(p, axis=-1)
        return _scalar(self._profile.g(r), p)

    def gradient(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        r = np.linalg.norm(p, axis=-1)
        return self._profile.tangential(r)[..., None] * p

    def hessian_matrix(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        r = np.linalg.norm(p, axis=-1)
        tangential = self._profile.tangential(r)
        radial = self._profile.d2g(r)
        safe = np.where(r > 0, r, 1.0)
        unit = np.where((r > 0)[..., None], p / safe[..., None], 0.0)
        identity = np.broadcast_to(np.eye(2), p.shape[:-1] + (2, 2))
        outer = unit[..., :, None] * unit[..., None, :]
        return tangential[..., None, None] * identity + (radial - tangential)[..., None, None] * outer


class TransformedDensity(Density):
    """
    Плотность f~(p) = f(M p) с обратимой матрицей M.

    Используется для замены направлений (E1, E2): M = T (E_ab)^{-1} = E^{-T}.
    """

    def __init__(self, base: Density, matrix: np.ndarray, spec: str | None = None):
        self.base = base
        self.matrix = np.asarray(matrix, dtype=float)
        self.spec = spec or f"transformed({base.spec})"

    def _map(self, p: np.ndarray) -> np.ndarray:
        return p @ self.matrix.T

    def eval(self, p):
        p = np.asarray(p, dtype=float)
        return self.base.eval(self._map(p))

    def gradient(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return self.base.gradient(self._map(p)) @ self.matrix

    def hessian_matrix(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        inner = self.base.hessian_matrix(self._map(p))
        return np.einsum('ki,...kl,lj->...ij', self.matrix, inner, self.matrix)


# Встроенные профили

def minimal_surface_profile() -> RadialProfile:
    return RadialProfile(
        g=lambda r: np.sqrt(1.0 + r ** 2),
        dg=lambda r: r / np.sqrt(1.0 + r ** 2),
        d2g=lambda r: (1.0 + r ** 2) ** -1.5,
        dg_over_r=lambda r: 1.0 / np.sqrt(1.0 + r ** 2),
    )


def power_profile(s: float) -> RadialProfile:
    return RadialProfile(
        g=lambda r: (1.0 + r ** 2) ** (s / 2),
        dg=lambda r: s * r * (1.0 + r ** 2) ** (s / 2 - 1),
        d2g=lambda r: s * (1.0 + r ** 2) ** (s / 2 - 2) * (1.0 + (s - 1) * r ** 2),
        dg_over_r=lambda r: s * (1.0 + r ** 2) ** (s / 2 - 1),
    )


def _log1p_over(r: np.ndarray) -> np.ndarray:
    """ln(1+r)/r с пределом 1 в нуле"""
    safe = np.where(r > 0, r, 1.0)
    return np.where(r > 0, np.log1p(safe) / safe, 1.0)


def nearly_linear_profile() -> RadialProfile:
    # g(r) = r ln(1+r)
    return RadialProfile(
        g=lambda r: r * np.log1p(r),
        dg=lambda r: np.log1p(r) + r / (1.0 + r),
        d2g=lambda r: (2.0 + r) / (1.0 + r) ** 2,
        dg_over_r=lambda r: _log1p_over(r) + 1.0 / (1.0 + r),
    )


def regularized_profile(eps: float) -> RadialProfile:
    # g(r) = G(sqrt(eps + r^2)), G(x) = x ln(1+x)
    def sigma(r):
        return np.sqrt(eps + r ** 2)

    def dG(x):
        return np.log1p(x) + x / (1.0 + x)

    def d2G(x):
        return (2.0 + x) / (1.0 + x) ** 2

    return RadialProfile(
        g=lambda r: sigma(r) * np.log1p(sigma(r)),
        dg=lambda r: dG(sigma(r)) * r / sigma(r),
        d2g=lambda r: d2G(sigma(r)) * r ** 2 / sigma(r) ** 2 + dG(sigma(r)) * eps / sigma(r) ** 3,
        dg_over_r=lambda r: dG(sigma(r)) / sigma(r),
    )


def minimal_surface() -> DensityModel:
    return DensityModel("minimal-surface", minimal_surface_profile(), spec="minimal-surface")


def power(s: float) -> DensityModel:
    if not s > 1:
        raise ConfigError({"density": f"для степенной плотности нужно s > 1, получено s={s}"})
    return DensityModel("power", power_profile(s), s=s, spec=f"power:s={s:g}")


def nearly_linear() -> DensityModel:
    return DensityModel("nearly-linear", nearly_linear_profile(), spec="nearly-linear")


def regularized(eps: float) -> DensityModel:
    if not eps > 0:
        raise ConfigError({"density": f"для регуляризованной плотности нужно eps > 0, получено eps={eps}"})
    return DensityModel("regularized", regularized_profile(eps), eps=eps, spec=f"regularized:eps={eps:g}")


def custom_radial(g: ScalarFunction, dg: ScalarFunction, d2g: ScalarFunction, name: str = "custom-radial") -> DensityModel:
    """Пользовательский радиальный профиль; корректность проверяется валидаторами"""
    return DensityModel("custom-radial", RadialProfile(g, dg, d2g), spec=name)


def parse_density(spec: str) -> DensityModel:
    """
    Строит плотность по строке спецификации.

    :param spec: "minimal-surface", "power:s=1.5", "nearly-linear" или "regularized:eps=0.1".
    :return: Объект DensityModel.
    """
    kind, params = parse_spec(spec, "density")
    if kind == "minimal-surface":
        return minimal_surface()
    if kind == "power":
        return power(spec_float(params, ["s", "0"], "density"))
    if kind == "nearly-linear":
        return nearly_linear()
    if kind == "regularized":
        return regularized(spec_float(params, ["eps", "epsilon", "0"], "density"))
    raise ConfigError({"density": f"неизвестная плотность '{spec}'"})


# Параметр lambda из критерия Ничше

def require_profile(density: Density) -> RadialProfile:
    if density.profile is None:
        raise NonRadialDensity(f"Плотность {density.spec} не радиальная")
    return density.profile


def one_plus_t_lambda(density: Density, t) -> np.ndarray:
    """
    1 + t lambda(t) = r g''(r)/g'(r), r = sqrt(t).

    Эта форма не теряет точность при t lambda(t) -> -1 (минимальная поверхность).
    """
    radial = require_profile(density)
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise DomainError("lambda(t) определена только для t >= 0")
    if np.any(t == 0):
        raise DegenerateProfile("lambda(t) в точке t = 0 не определена для общего профиля")
    r = np.sqrt(t)
    dg = radial.dg(r)
    if np.any(dg == 0) or not np.all(np.isfinite(dg)):
        raise DegenerateProfile(f"f'(t) обращается в ноль для плотности {density.spec}")
    return radial.q(r)


def radial_lambda(density: Density, t):
    """
    lambda(t) = 2 f''(t)/f'(t) для f(t) = g(sqrt(t)).

    :param density: Плотность с радиальным профилем.
    :param t: Точка (или массив точек) t > 0.
    :return: Значение lambda(t).
    """
    t_arr = np.asarray(t, dtype=float)
    values = (one_plus_t_lambda(density, t_arr) - 1.0) / t_arr
    return float(values) if t_arr.ndim == 0 else values


# Выборки для валидаторов

def hypothesis_radii(p_max: float, per_decade: int = 8, r_min: float = 1e-2) -> np.ndarray:
    """Радиусы 0 и 10^k с шагом 1/per_decade по k от log10(p_max) вниз до r_min"""
    top = np.log10(p_max)
    exponents = top - np.arange(0.0, top - np.log10(r_min) + 1e-9, 1.0 / per_decade)
    return np.concatenate([[0.0], np.sort(10.0 ** exponents)])


def hypothesis_grid(p_max: float | None = None, n_directions: int = 16,
                    per_decade: int = 8) -> Tuple[np.ndarray, np.ndarray]:
    """
    Пары (p, q) для проверки эллиптичности и оценки почти линейного роста.

    Для каждого p берутся q = p/|p|, его поворот на 90 градусов, e1 и e2;
    для радиальных плотностей первые два - собственные векторы формы.
    """
    p_max = p_max or Config.P_MAX
    radii = hypothesis_radii(p_max, per_decade)
    angles = 2.0 * np.pi * np.arange(n_directions) / n_directions
    units = np.stack([np.cos(angles), np.sin(angles)], axis=-1)
    points, directions = [], []
    for r in radii:
        for unit in (units if r > 0 else units[:1]):
            p = r * unit
            perp = np.array([-unit[1], unit[0]])
            for q in (unit, perp, np.array([1.0, 0.0]), np.array([0.0, 1.0]), np.array([1.0, 1.0]) / np.sqrt(2)):
                points.append(p)
                directions.append(q)
    return np.array(points), np.array(directions)


def _sample_range(points: np.ndarray) -> list:
    r = np.linalg.norm(points, axis=-1)
    return [float(r.min()), float(r.max())]


def validate_ellipticity(density: Density, points: np.ndarray, directions: np.ndarray) -> ConditionReport:
    """
    Эллиптичность: D2f(p)(q, q) > 0 на выборке.

    :param density: Плотность.
    :param points: Точки p, массив (N, 2).
    :param directions: Направления q != 0, массив (N, 2).
    :return: Отчет с минимумом D2f(p)(q,q)/|q|^2.
    """
    points, directions = np.asarray(points, dtype=float), np.asarray(directions, dtype=float)
    if len(points) == 0:
        raise DomainError("Пустая выборка")
    norms = np.linalg.norm(directions, axis=-1)
    if np.any(norms == 0):
        raise DomainError("Направление q = 0 в выборке")
    values = apply_form(density.hessian_matrix(points), directions, directions) / norms ** 2
    index = int(np.nanargmin(values))
    minimum = float(values[index])
    holds = bool(np.all(np.isfinite(values)) and minimum > 0)
    logging.info(f"Эллиптичность {density.spec}: min = {minimum:.6g}, {'да' if holds else 'нет'}")
    return ConditionReport(
        hypothesis="ellipticity", holds=holds, constant=minimum,
        witness_point=None if holds else points[index].tolist(),
        witness_lhs=None if holds else minimum, witness_rhs=None if holds else 0.0,
        sample_range=_sample_range(points),
        sample_description=f"{len(points)} пар (p, q)",
        details={"witness_direction": None if holds else directions[index].tolist()},
    )


def _fitted_bound(hypothesis: str, density: Density, points: np.ndarray, ratios: np.ndarray,
                  lhs: np.ndarray, bound_shape: np.ndarray, rtol: float) -> ConditionReport:
    """
    Подбирает константу на [1, r_max/10] и на [1, r_max] и сравнивает их.

    Условие считается выполненным, если константа конечна и меняется меньше чем на rtol.
    В отчет идет наибольшее отношение по всей выборке, включая |p| < 1.
    """
    r = np.linalg.norm(points, axis=-1)
    upper = r >= 1.0
    if not np.any(upper):
        upper = np.ones_like(r, dtype=bool)
    inner = upper & (r <= r.max() / 10 * (1 + 1e-12))
    if not np.any(inner):
        inner = upper
    outer_constant = float(np.max(ratios[upper]))
    inner_constant = float(np.max(ratios[inner]))
    finite = bool(np.all(np.isfinite(ratios)))
    change = abs(outer_constant - inner_constant) / max(abs(inner_constant), 1e-300)
    holds = finite and change < rtol
    index = int(np.nanargmax(np.where(upper, ratios, -np.inf))) if finite else int(np.argmin(np.isfinite(ratios)))
    logging.info(f"{hypothesis} {density.spec}: константа {inner_constant:.6g} -> {outer_constant:.6g}, "
                 f"{'да' if holds else 'нет'}")
    return ConditionReport(
        hypothesis=hypothesis, holds=holds, constant=float(np.max(ratios)),
        witness_point=None if holds else points[index].tolist(),
        witness_lhs=None if holds else float(lhs[index]),
        witness_rhs=None if holds else float(inner_constant * bound_shape[index]),
        sample_range=_sample_range(points),
        sample_description=f"{len(points)} точек, сравнение диапазонов [1, {r.max() / 10:g}] и [1, {r.max():g}]",
        details={"inner_constant": inner_constant, "outer_constant": outer_constant, "relative_change": change},
    )


def validate_nearly_linear_bound(density: Density, points: np.ndarray, directions: np.ndarray,
                                 rtol: float | None = None) -> ConditionReport:
    """
    Оценка почти линейного роста: D2f(p)(q,q) <= lambda ln(2+|p|)/(1+|p|) |q|^2.

    :return: Отчет с подобранной константой lambda.
    """
    points, directions = np.asarray(points, dtype=float), np.asarray(directions, dtype=float)
    if len(points) == 0:
        raise DomainError("Пустая выборка")
    r = np.linalg.norm(points, axis=-1)
    lhs = apply_form(density.hessian_matrix(points), directions, directions) / np.sum(directions ** 2, axis=-1)
    shape = np.log(2.0 + r) / (1.0 + r)
    return _fitted_bound("nearly-linear-bound", density, points, lhs / shape, lhs, shape,
                         Config.STABILITY_RTOL if rtol is None else rtol)


def validate_linear_bound(density: Density, points: np.ndarray, rtol: float | None = None) -> ConditionReport:
    """
    Оценка линейного роста: |D2f(p)| <= Lambda/(1+|p|), норма формы - наибольшее собственное значение.

    :return: Отчет с подобранной константой Lambda.
    """
    points = np.asarray(points, dtype=float)
    if len(points) == 0:
        raise DomainError("Пустая выборка")
    r = np.linalg.norm(points, axis=-1)
    low, high = form_eigenvalues(density.hessian_matrix(points))
    lhs = np.maximum(np.abs(low), np.abs(high))
    shape = 1.0 / (1.0 + r)
    return _fitted_bound("linear-bound", density, points, lhs / shape, lhs, shape,
                         Config.STABILITY_RTOL if rtol is None else rtol)


def validate_radial_decay(density: Density, mu: float = 3.0, radii: np.ndarray | None = None,
                          rtol: float | None = None) -> ConditionReport:
    """
    Радиальная гипотеза 0 < g''(t) <= c (1+t)^(-mu) (mu >= 3).

    :return: Отчет с подобранной константой c; нарушение знака g'' тоже провал.
    """
    radial = require_profile(density)
    radii = hypothesis_radii(Config.P_MAX) if radii is None else np.asarray(radii, dtype=float)
    d2g = radial.d2g(radii)
    points = np.stack([radii, np.zeros_like(radii)], axis=-1)
    shape = (1.0 + radii) ** (-mu)
    report = _fitted_bound(f"radial-decay-mu={mu:g}", density, points, d2g / shape, d2g, shape,
                           Config.STABILITY_RTOL if rtol is None else rtol)
    if np.all(d2g > 0):
        return report
    index = int(np.argmin(d2g))
    return report.model_copy(update={
        "holds": False, "witness_point": points[index].tolist(),
        "witness_lhs": 0.0, "witness_rhs": float(d2g[index]),
    })


def growth_ratio(density: Density, growth: str = "nearly-linear", points: np.ndarray | None = None,
                 rtol: float | None = None) -> ConditionReport:
    """
    Следствие замечания о росте: |f(p)| <= c(|p| ln(1+|p|) + 1) или |f(p)| <= c(|p| + 1).

    :param growth: "nearly-linear" или "linear".
    """
    if points is None:
        points, _ = hypothesis_grid()
    points = np.asarray(points, dtype=float)
    r = np.linalg.norm(points, axis=-1)
    values = np.abs(np.asarray(density.eval(points), dtype=float))
    if growth == "nearly-linear":
        shape = r * np.log1p(r) + 1.0
    elif growth == "linear":
        shape = r + 1.0
    else:
        raise ConfigError({"growth": f"неизвестный тип роста '{growth}'"})
    return _fitted_bound(f"growth-{growth}", density, points, values / shape, values, shape,
                         Config.STABILITY_RTOL if rtol is None else rtol)


# Согласованность производных

def derivative_check(density: Density, rng: np.random.Generator, n: int = 100, p_max: float = 1e3,
                     grad_rtol: float = 1e-6, hess_rtol: float = 1e-5) -> ConditionReport:
    """
    Сравнивает gradient и hessian с центральными разностями eval и gradient.

    Ошибка меряется в норме: |fd - exact| / |exact| (абсолютно, если exact = 0).
    """
    radii = p_max * rng.random(n) ** 2
    angles = 2.0 * np.pi * rng.random(n)
    points = np.stack([radii * np.cos(angles), radii * np.sin(angles)], axis=-1)

    worst_grad, worst_hess = 0.0, 0.0
    worst_score, worst_index = -1.0, 0
    for k, p in enumerate(points):
        step = 1e-5 * max(1.0, float(np.linalg.norm(p)))
        grad = density.gradient(p)
        hess = density.hessian_matrix(p)
        fd_grad = np.empty(2)
        fd_hess = np.empty((2, 2))
        for i in range(2):
            e = np.zeros(2)
            e[i] = step
            fd_grad[i] = (density.eval(p + e) - density.eval(p - e)) / (2 * step)
            fd_hess[:, i] = (density.gradient(p + e) - density.gradient(p - e)) / (2 * step)
        grad_error = np.linalg.norm(fd_grad - grad) / (np.linalg.norm(grad) or 1.0)
        hess_error = np.linalg.norm(fd_hess - hess) / (np.linalg.norm(hess) or 1.0)
        score = max(grad_error / grad_rtol, hess_error / hess_rtol)
        if score > worst_score:
            worst_score, worst_index = score, k
        worst_grad = max(worst_grad, float(grad_error))
        worst_hess = max(worst_hess, float(hess_error))

    holds = worst_grad <= grad_rtol and worst_hess <= hess_rtol
    return ConditionReport(
        hypothesis="derivative-consistency", holds=holds, constant=max(worst_grad, worst_hess),
        witness_point=None if holds else points[worst_index].tolist(),
        witness_lhs=None if holds else float(worst_score),
        witness_rhs=None if holds else 1.0,
        sample_range=_sample_range(points),
        sample_description=f"{n} случайных точек, |p| <= {p_max:g}",
        details={"gradient_error": worst_grad, "hessian_error": worst_hess},
    )


def radial_consistency(density: Density, points: np.ndarray, rtol: float = 1e-10) -> ConditionReport:
    """
    Собственные значения D2f(p) равны g''(|p|) (вдоль p) и g'(|p|)/|p| (поперек p).
    """
    radial = require_profile(density)
    points = np.asarray(points, dtype=float)
    points = points[np.linalg.norm(points, axis=-1) > 0]
    r = np.linalg.norm(points, axis=-1)
    hess = density.hessian_matrix(points)
    unit = points / r[:, None]
    perp = np.stack([-unit[:, 1], unit[:, 0]], axis=-1)
    along = apply_form(hess, unit, unit)
    across = apply_form(hess, perp, perp)
    mixed = apply_form(hess, unit, perp)
    d2g, tangential = radial.d2g(r), radial.dg(r) / r
    # Ошибка относительно нормы формы: при |p| >> 1 собственные значения расходятся на порядки
    scale = np.maximum(np.abs(d2g), np.abs(tangential))
    error = np.maximum.reduce([np.abs(along - d2g), np.abs(across - tangential), np.abs(mixed)]) / scale
    index = int(np.argmax(error))
    holds = bool(error[index] <= rtol)
    return ConditionReport(
        hypothesis="radial-consistency", holds=holds, constant=float(error[index]),
        witness_point=None if holds else points[index].tolist(),
        witness_lhs=None if holds else float(error[index]), witness_rhs=None if holds else rtol,
        sample_range=_sample_range(points), sample_description=f"{len(points)} точек",
    )
