"""
Условия баланса на градиент решения, мера отклонения от аффинности и замена направлений.

Все проверки выполняются на конечной выборке точек: "выполнено" всегда означает
"выполнено на выборке в указанной области".
"""
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Literal, Optional, Sequence, Tuple

import numpy as np

from bernstein_lab.core.exceptions import ConfigError, SingularFrame, WeightInadmissible
from bernstein_lab.models.reports import ConditionReport
from bernstein_lab.services.caccioppoli import RhoFunction, log_shift_rho, parse_rho, rho_admissible
from bernstein_lab.services.density import Density, TransformedDensity
from bernstein_lab.services.fields import ClosedFormField, DiscreteField, Field
from bernstein_lab.services.functions import parse_spec, polar_samples, spec_float


@dataclass(frozen=True)
class DirectionFrame:
    """
    Векторы E1, E2 и отображение T с T e_a = E_a. Матрица Грама E_ab = E_a . E_b.
    """
    E1: Tuple[float, float]
    E2: Tuple[float, float]

    def __post_init__(self):
        e1, e2 = np.asarray(self.E1, dtype=float), np.asarray(self.E2, dtype=float)
        det = e1[0] * e2[1] - e1[1] * e2[0]
        if abs(det) <= 1e-12 * max(np.linalg.norm(e1) * np.linalg.norm(e2), 1e-300):
            raise SingularFrame(f"E1 = {list(self.E1)} и E2 = {list(self.E2)} линейно зависимы")

    @cached_property
    def matrix(self) -> np.ndarray:
        return np.column_stack([np.asarray(self.E1, dtype=float), np.asarray(self.E2, dtype=float)])

    @property
    def gram(self) -> np.ndarray:
        return self.matrix.T @ self.matrix

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.matrix))

    @cached_property
    def inverse_matrix(self) -> np.ndarray:
        return np.linalg.inv(self.matrix)

    @property
    def density_matrix(self) -> np.ndarray:
        """T (E_ab)^(-1) = T^(-T)"""
        return self.matrix @ np.linalg.inv(self.gram)

    def inverse(self) -> "DirectionFrame":
        inv = self.inverse_matrix
        return DirectionFrame(tuple(inv[:, 0]), tuple(inv[:, 1]))

    def directional(self, gradients: np.ndarray) -> np.ndarray:
        """(d_E1 u, d_E2 u) = T^T Du"""
        return gradients @ self.matrix


def parse_frame(E1: Sequence[float], E2: Sequence[float]) -> DirectionFrame:
    if len(E1) != 2 or len(E2) != 2:
        raise ConfigError({"frame": "E1 и E2 должны иметь по две компоненты"})
    return DirectionFrame(tuple(float(v) for v in E1), tuple(float(v) for v in E2))


def direction_transform(frame: DirectionFrame, density: Density) -> TransformedDensity:
    """f~(p) = f(T (E_ab)^(-1) p)"""
    return TransformedDensity(density, frame.density_matrix, spec=f"transformed({density.spec})")


def transform_field(frame: DirectionFrame, field: Field) -> Field:
    """
    u~(x) = u(T x). Для дискретного поля узлы сетки переносятся отображением T^(-1),
    значения в узлах сохраняются.
    """
    if isinstance(field, DiscreteField):
        mesh = field.mesh.mapped(frame.inverse_matrix)
        return DiscreteField(mesh, field.values.copy(), name=f"{field.name}(Tx)")
    if isinstance(field, ClosedFormField):
        return field.composed(frame.matrix, name=f"{field.name}(Tx)")
    raise TypeError(f"Неподдерживаемый тип поля {type(field).__name__}")


# Условия баланса

@dataclass(frozen=True)
class BalanceSpec:
    """
    power-balance:  |d_i u| <= K (|d_j u|^m + 1)
    log-balance:    |d_i u| ln^2(1 + |d_i u|) <= K (|d_j u| + 1)
    rho-pointwise:  Gamma_i^(-1/2) rho^2(Gamma_i)/rho'(Gamma_i) <= c Gamma_j^(1/2)
    rho-average:    sup_R R^(-2) int_{B_R} Gamma_i^(-1) rho^2(Gamma_i)/rho'(Gamma_i) < inf

    direction = 1 означает i = 1, j = 2; direction = 2 - наоборот.
    """
    which: Literal["power-balance", "log-balance", "rho-pointwise", "rho-average"]
    K: float = 1.0
    m: float = 0.0
    direction: int = 1
    rho: Optional[RhoFunction] = None
    c: float = 100.0

    def __post_init__(self):
        errors = {}
        if not 0 <= self.m < 1:
            errors["m"] = f"нужно 0 <= m < 1, получено {self.m}"
        if not self.K > 0:
            errors["K"] = f"нужно K > 0, получено {self.K}"
        if not self.c > 0:
            errors["c"] = f"нужно c > 0, получено {self.c}"
        if self.direction not in (1, 2):
            errors["dir"] = f"направление 1 или 2, получено {self.direction}"
        if errors:
            raise ConfigError(errors)

    @property
    def constant(self) -> float:
        return self.c if self.which.startswith("rho") else self.K

    @property
    def rho_function(self) -> RhoFunction:
        return self.rho or log_shift_rho()

    def describe(self) -> str:
        if self.which == "power-balance":
            return f"power-balance:m={self.m:g},K={self.K:g},dir={self.direction}"
        if self.which == "log-balance":
            return f"log-balance:K={self.K:g},dir={self.direction}"
        return f"{self.which}:rho={self.rho_function.name},c={self.c:g},dir={self.direction}"

    def sides(self, gradients: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """Левая часть и форма правой части (без константы) в каждой точке"""
        i, j = (0, 1) if self.direction == 1 else (1, 0)
        di, dj = np.abs(gradients[:, i]), np.abs(gradients[:, j])
        if self.which == "power-balance":
            return di, dj ** self.m + 1.0
        if self.which == "log-balance":
            return di * np.log1p(di) ** 2, dj + 1.0
        rho = self.rho_function
        gamma_i, gamma_j = 1.0 + di ** 2, 1.0 + dj ** 2
        return rho.rho(gamma_i) ** 2 / (np.sqrt(gamma_i) * rho.derivative(gamma_i)), np.sqrt(gamma_j)


def parse_balance(spec: str) -> BalanceSpec:
    """
    "power-balance:m=0.5,K=10,dir=1", "log-balance:K=5,dir=2", "rho-pointwise:rho=log-shift,c=100",
    "rho-average:rho=sqrt".
    """
    kind, params = parse_spec(spec, "check")
    direction = int(spec_float(params, ["dir", "direction"], "check", default=1))
    if kind == "power-balance":
        return BalanceSpec(kind, K=spec_float(params, ["K"], "check"), m=spec_float(params, ["m"], "check"),
                           direction=direction)
    if kind == "log-balance":
        return BalanceSpec(kind, K=spec_float(params, ["K"], "check"), direction=direction)
    if kind in ("rho-pointwise", "rho-average"):
        rho = parse_rho(params.get("rho", "log-shift"), params, "check")
        return BalanceSpec(kind, rho=rho, c=spec_float(params, ["c"], "check", default=100.0), direction=direction)
    raise ConfigError({"check": f"неизвестное условие '{spec}'"})


def parse_region(spec: str | float) -> float:
    """Радиус области выборки: число или "disk:R=100" """
    if isinstance(spec, (int, float)):
        radius = float(spec)
    else:
        kind, params = parse_spec(spec, "region")
        if kind not in ("disk", "polygonal-disk"):
            raise ConfigError({"region": f"поддерживаются только круги, получено '{spec}'"})
        radius = spec_float(params, ["R", "0"], "region")
    if not radius > 0:
        raise ConfigError({"region": f"радиус должен быть положительным, получено {radius}"})
    return radius


def _field_gradients(field: Field, points: np.ndarray, frame: DirectionFrame | None) -> Tuple[np.ndarray, np.ndarray]:
    """Градиенты в точках выборки (без точек вне сетки), при необходимости в направлениях рамки"""
    gradients = np.asarray(field.gradient(points), dtype=float).reshape(-1, 2)
    inside = np.all(np.isfinite(gradients), axis=-1)
    gradients = gradients[inside]
    if frame is not None:
        gradients = frame.directional(gradients)
    return points[inside], gradients


def _require_admissible(spec: BalanceSpec):
    report = rho_admissible(spec.rho_function)
    if not report.holds:
        raise WeightInadmissible(f"Функция rho={spec.rho_function.name} недопустима")


def evaluate_balance(field: Field, spec: BalanceSpec, point: Sequence[float],
                     frame: DirectionFrame | None = None) -> Tuple[float, float]:
    """Левая и правая части поточечного условия в одной точке"""
    points, gradients = _field_gradients(field, np.asarray(point, dtype=float).reshape(1, 2), frame)
    if not len(points):
        return float("nan"), float("nan")
    lhs, shape = spec.sides(gradients)
    return float(lhs[0]), float(spec.constant * shape[0])


def check_balance(field: Field, spec: BalanceSpec, region: str | float = 100.0,
                  frame: DirectionFrame | None = None, n_angles: int = 64, n_radii: int = 48) -> ConditionReport:
    """
    Проверяет поточечное условие на полярной выборке в круге |x| <= R.

    :return: Отчет с наименьшей константой K (или c), при которой условие выполнено на выборке.
    """
    if spec.which == "rho-average":
        raise ConfigError({"check": "условие rho-average проверяется функцией check_rho_average"})
    if spec.which == "rho-pointwise":
        _require_admissible(spec)
    radius = parse_region(region)
    points, gradients = _field_gradients(field, polar_samples(radius, n_angles, n_radii), frame)
    if not len(points):
        raise ConfigError({"region": f"область |x| <= {radius:g} не пересекается с областью поля"})

    lhs, shape = spec.sides(gradients)
    ratios = lhs / shape
    index = int(np.argmax(ratios))
    measured = float(ratios[index])
    holds = bool(measured <= spec.constant)
    details = {"spec": spec.describe()}
    if frame is not None:
        details["frame"] = {"E1": list(frame.E1), "E2": list(frame.E2)}
        details["extension"] = spec.which == "log-balance" and spec.direction == 2
    logging.info(f"{spec.describe()} для {field.name}: константа {measured:.6g}, {'да' if holds else 'нет'}")
    return ConditionReport(
        hypothesis=spec.which, holds=holds, constant=measured,
        witness_point=None if holds else points[index].tolist(),
        witness_lhs=None if holds else float(lhs[index]),
        witness_rhs=None if holds else float(spec.constant * shape[index]),
        sample_range=[0.0, radius], sample_description=f"{len(points)} точек полярной сетки",
        details=details,
    )


def check_rho_pointwise(field: Field, rho: RhoFunction | None = None, region: str | float = 100.0,
                              c: float = 100.0, direction: int = 1,
                              frame: DirectionFrame | None = None) -> ConditionReport:
    """Gamma_1^(-1/2) rho^2(Gamma_1)/rho'(Gamma_1) <= c Gamma_2^(1/2) на выборке"""
    spec = BalanceSpec("rho-pointwise", rho=rho, c=c, direction=direction)
    return check_balance(field, spec, region, frame)


def _disk_integral(field: Field, radius: float, integrand, frame: DirectionFrame | None,
                   n_radial: int = 64, n_angles: int = 128) -> float:
    if isinstance(field, DiscreteField):
        mesh = field.mesh
        inside = np.linalg.norm(mesh.centroids, axis=-1) < radius
        gradients = field.element_gradients()[inside]
        if frame is not None:
            gradients = frame.directional(gradients)
        return float(np.sum(mesh.areas[inside] * integrand(gradients)))

    nodes, weights = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * radius * (nodes + 1.0)
    w_r = 0.5 * radius * weights * r
    angles = 2.0 * np.pi * np.arange(n_angles) / n_angles
    rr, aa = np.meshgrid(r, angles, indexing='ij')
    points = np.stack([rr * np.cos(aa), rr * np.sin(aa)], axis=-1).reshape(-1, 2)
    gradients = np.asarray(field.gradient(points), dtype=float)
    if frame is not None:
        gradients = frame.directional(gradients)
    values = integrand(gradients).reshape(n_radial, n_angles)
    return float(np.sum(w_r[:, None] * values) * 2.0 * np.pi / n_angles)


def check_rho_average(field: Field, rho: RhoFunction | None = None, radii: Sequence[float] = (1, 2, 4, 8, 16, 32),
                            tolerance: float = 0.05, direction: int = 1,
                            frame: DirectionFrame | None = None) -> ConditionReport:
    """
    Последовательность R^(-2) int_{B_R} Gamma^(-1) rho^2/rho' dx.

    Условие выполнено на масштабе, если значения на верхней половине радиусов не превосходят
    (1 + tolerance) * максимум на нижней половине.
    """
    spec = BalanceSpec("rho-average", rho=rho, direction=direction)
    _require_admissible(spec)
    radii = [float(R) for R in radii]
    if len(radii) < 2 or any(b <= a for a, b in zip(radii, radii[1:])) or radii[0] <= 0:
        raise ConfigError({"R": "нужно не меньше двух положительных возрастающих радиусов"})
    i = direction - 1
    rho_function = spec.rho_function

    def integrand(gradients):
        gamma = 1.0 + gradients[:, i] ** 2
        return rho_function.rho(gamma) ** 2 / (gamma * rho_function.derivative(gamma))

    sequence = np.array([_disk_integral(field, R, integrand, frame) / R ** 2 for R in radii])
    half = len(radii) // 2
    bound = (1.0 + tolerance) * float(np.max(sequence[:half]))
    top = sequence[half:]
    index = half + int(np.argmax(top))
    holds = bool(np.all(top <= bound))
    logging.info(f"Среднее условие rho={rho_function.name} для {field.name}: {np.round(sequence, 6).tolist()}")
    return ConditionReport(
        hypothesis="rho-average", holds=holds, constant=float(np.max(sequence)),
        witness_point=None if holds else [radii[index], 0.0],
        witness_lhs=None if holds else float(sequence[index]),
        witness_rhs=None if holds else bound,
        sample_range=[radii[0], radii[-1]], sample_description=f"{len(radii)} радиусов",
        details={"radii": radii, "sequence": sequence.tolist(), "spec": spec.describe()},
    )


def affinity_measure(field: Field, region: str | float | None = None) -> float:
    """
    Нормированный остаток наилучшего аффинного приближения a x1 + b x2 + c по методу наименьших квадратов:
    RMS остатка / RMS(u - среднее). Ноль на аффинных полях.
    """
    if isinstance(field, DiscreteField):
        points, values = field.mesh.nodes, field.values
        if region is not None:
            inside = np.linalg.norm(points, axis=-1) <= parse_region(region) * (1 + 1e-12)
            points, values = points[inside], values[inside]
    else:
        points = polar_samples(parse_region(1.0 if region is None else region))
        values = np.asarray(field.value(points), dtype=float)

    spread = np.sqrt(np.mean((values - values.mean()) ** 2))
    if spread == 0:
        return 0.0
    design = np.column_stack([points, np.ones(len(points))])
    coefficients, *_ = np.linalg.lstsq(design, values, rcond=None)
    residual = values - design @ coefficients
    return float(np.sqrt(np.mean(residual ** 2)) / spread)
