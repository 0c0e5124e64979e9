"""
Весовые неравенства типа Каччопполи для производной d_i u.

Для срезающей функции eta (eta = 1 на B_R, eta = 0 вне B_2R) и Gamma = 1 + |d_i u|^2:

    lhs = int eta^2 D2f(Du)(D d_i u, D d_i u) w_lhs(Gamma),
    rhs = int D2f(Du)(D eta, D eta) w_rhs(Gamma),
    S   = int eta d_i u D2f(Du)(D d_i u, D eta) w_mix(Gamma),

T1 - часть lhs по кольцу R < |x| < 2R, T2 = rhs. Веса:

    power(alpha):  Gamma^alpha,        Gamma^(alpha+1),              Gamma^alpha
    log:           Phi(Gamma),         Gamma^(1/2) ln^2(e^2-1+Gamma), Phi(Gamma)
    rho:           Gamma^(-1/2) rho,   Gamma^(-1/2) rho^2/rho',      Gamma^(-1/2) rho

где Phi(t) = ln(e^2-1+t)/sqrt(t). При таком выборе |S| <= sqrt(T1 T2) поточечно по Коши-Буняковскому.
"""
import asyncio
import logging
from dataclasses import dataclass
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np

from bernstein_lab.core.config import Config
from bernstein_lab.core.exceptions import (ConfigError, DomainError, LabError, MissingSecondDerivatives,
                                           WeightInadmissible)
from bernstein_lab.models.reports import CaccioppoliReport, ConditionReport
from bernstein_lab.services.density import Density, apply_form
from bernstein_lab.services.fields import DiscreteField, Field
from bernstein_lab.services.functions import log_spaced, parse_spec, spec_float
from bernstein_lab.services.mesh import disk_mesh
from bernstein_lab.services.solver import minimize

SHIFT = np.e ** 2 - 1.0


# Срезающая функция

def smoothstep(xi: np.ndarray) -> np.ndarray:
    xi = np.clip(xi, 0.0, 1.0)
    return xi ** 3 * (10.0 - 15.0 * xi + 6.0 * xi ** 2)


def smoothstep_derivative(xi: np.ndarray) -> np.ndarray:
    inside = (xi > 0.0) & (xi < 1.0)
    xi = np.clip(xi, 0.0, 1.0)
    return np.where(inside, 30.0 * xi ** 2 * (1.0 - xi) ** 2, 0.0)


@dataclass(frozen=True)
class CutoffProfile:
    """eta(x) = 1 - S((|x| - R)/R), S - сглаживающий многочлен пятой степени; max |D eta| = 1.875/R"""
    R: float

    def __post_init__(self):
        if not self.R > 0:
            raise DomainError(f"Радиус срезающей функции должен быть положительным: R={self.R}")

    @property
    def outer(self) -> float:
        return 2.0 * self.R

    def eta(self, points: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(points, axis=-1)
        return 1.0 - smoothstep((r - self.R) / self.R)

    def gradient(self, points: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(points, axis=-1)
        safe = np.where(r > 0, r, 1.0)
        radial = -smoothstep_derivative((r - self.R) / self.R) / self.R
        return (radial / safe)[..., None] * points

    def in_annulus(self, points: np.ndarray) -> np.ndarray:
        r = np.linalg.norm(points, axis=-1)
        return (r > self.R) & (r < self.outer)


def gamma_field(field: Field, i: int, points: np.ndarray | None = None) -> np.ndarray:
    """
    Gamma_i = 1 + |d_i u|^2 в точках (для дискретного поля без точек - на элементах).
    """
    if i not in (1, 2):
        raise ConfigError({"direction": f"направление должно быть 1 или 2, получено {i}"})
    if points is None:
        if not isinstance(field, DiscreteField):
            raise ValueError("Для поля, заданного формулой, нужны точки")
        gradients = field.element_gradients()
    else:
        gradients = np.asarray(field.gradient(np.asarray(points, dtype=float)), dtype=float)
    return 1.0 + gradients[..., i - 1] ** 2


# Логарифмический вес

def _check_t(t: np.ndarray):
    if np.any(t < 1):
        raise DomainError("Вес определен только при t >= 1")


def log_weight(t):
    """Phi(t) = ln(e^2 - 1 + t)/sqrt(t); Phi(1) = 2, Phi(inf) = 0"""
    t_arr = np.asarray(t, dtype=float)
    _check_t(t_arr)
    values = np.log(SHIFT + t_arr) / np.sqrt(t_arr)
    return float(values) if t_arr.ndim == 0 else values


def log_weight_derivative(t):
    t_arr = np.asarray(t, dtype=float)
    _check_t(t_arr)
    values = 1.0 / ((SHIFT + t_arr) * np.sqrt(t_arr)) - np.log(SHIFT + t_arr) / (2.0 * t_arr ** 1.5)
    return float(values) if t_arr.ndim == 0 else values


def log_weight_chain(t):
    """Phi + 2t Phi' - 2 Phi' >= 2 sqrt(t)/(e^2 - 1 + t), так как Phi' <= 0"""
    t_arr = np.asarray(t, dtype=float)
    derivative = log_weight_derivative(t_arr)
    return log_weight(t_arr) + 2.0 * t_arr * derivative - 2.0 * derivative


# Функции rho

@dataclass(frozen=True)
class RhoFunction:
    name: str
    rho: Callable[[np.ndarray], np.ndarray]
    derivative: Callable[[np.ndarray], np.ndarray]

    def weight(self, t: np.ndarray) -> np.ndarray:
        """t^(-1/2) rho(t)"""
        return self.rho(t) / np.sqrt(t)

    def identity_sides(self, t: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """(Phi + 2t Phi', 2 sqrt(t) rho') для Phi = t^(-1/2) rho; стороны совпадают"""
        t = np.asarray(t, dtype=float)
        phi_derivative = self.derivative(t) / np.sqrt(t) - self.rho(t) / (2.0 * t ** 1.5)
        return self.weight(t) + 2.0 * t * phi_derivative, 2.0 * np.sqrt(t) * self.derivative(t)


def log_shift_rho() -> RhoFunction:
    return RhoFunction("log-shift", lambda t: np.log(SHIFT + t), lambda t: 1.0 / (SHIFT + t))


def sqrt_rho() -> RhoFunction:
    return RhoFunction("sqrt", np.sqrt, lambda t: 0.5 / np.sqrt(t))


def linear_rho() -> RhoFunction:
    return RhoFunction("linear", lambda t: np.asarray(t, dtype=float), lambda t: np.ones_like(np.asarray(t, dtype=float)))


def power_rho(beta: float) -> RhoFunction:
    return RhoFunction(f"power:beta={beta:g}", lambda t: t ** beta, lambda t: beta * t ** (beta - 1.0))


RHO_REGISTRY: Dict[str, Callable[[], RhoFunction]] = {
    "log-shift": log_shift_rho,
    "sqrt": sqrt_rho,
    "linear": linear_rho,
}


def parse_rho(name: str, params: Dict[str, str] | None = None, field: str = "rho") -> RhoFunction:
    """"log-shift", "sqrt", "linear" или "power" с параметром beta"""
    params = params or {}
    if name == "power":
        return power_rho(spec_float(params, ["beta"], field))
    if name not in RHO_REGISTRY:
        raise ConfigError({field: f"неизвестная функция rho '{name}'"})
    return RHO_REGISTRY[name]()


def rho_admissible(rho: RhoFunction, t_range: Tuple[float, float] = (1.0, 1e8), samples: int = 200) -> ConditionReport:
    """
    Допустимость rho на [1, t_max]: rho'(t) > 0 и d/dt[t^(-1/2) rho(t)] <= 0.

    Вторая производная берется в замкнутом виде rho'(t)/sqrt(t) - rho(t)/(2 t^(3/2)).
    """
    t = log_spaced(t_range[0], t_range[1], samples)
    derivative = rho.derivative(t)
    first, second = derivative / np.sqrt(t), rho.rho(t) / (2.0 * t ** 1.5)
    decay = first - second
    tolerance = 1e-12 * (np.abs(first) + np.abs(second))

    positive = derivative > 0
    decreasing = decay <= tolerance
    holds = bool(np.all(positive) and np.all(decreasing))
    witness = None
    if not holds:
        if not np.all(positive):
            index = int(np.argmin(derivative))
            witness = ([float(t[index]), 0.0], float(-derivative[index]), 0.0)
        else:
            index = int(np.argmax(decay - tolerance))
            witness = ([float(t[index]), 0.0], float(decay[index]), 0.0)
    logging.info(f"Допустимость rho={rho.name}: {'да' if holds else 'нет'}")
    return ConditionReport(
        hypothesis=f"rho-admissible:{rho.name}", holds=holds, constant=float(np.max(decay)),
        witness_point=witness[0] if witness else None,
        witness_lhs=witness[1] if witness else None,
        witness_rhs=witness[2] if witness else None,
        sample_range=[float(t_range[0]), float(t_range[1])], sample_description=f"{samples} точек t",
        details={"min_derivative": float(np.min(derivative))},
    )


# Спецификация веса

@dataclass(frozen=True)
class WeightSpec:
    variant: Literal["power", "log", "general"]
    alpha: Optional[float] = None
    rho: Optional[RhoFunction] = None
    direction: int = 1

    def __post_init__(self):
        if self.direction not in (1, 2):
            raise ConfigError({"weight": f"направление должно быть 1 или 2, получено {self.direction}"})
        if self.variant == "power" and (self.alpha is None or not self.alpha > -0.5):
            raise WeightInadmissible(f"Степенной вес требует alpha > -1/2, получено alpha={self.alpha}")
        if self.variant == "general":
            if self.rho is None:
                raise WeightInadmissible("Для общего веса не задана функция rho")
            report = rho_admissible(self.rho)
            if not report.holds:
                raise WeightInadmissible(f"Функция rho={self.rho.name} недопустима в точке t={report.witness_point[0]:g}")

    def describe(self) -> str:
        if self.variant == "power":
            return f"power:alpha={self.alpha:g},dir={self.direction}"
        if self.variant == "log":
            return f"log,dir={self.direction}"
        return f"rho:{self.rho.name},dir={self.direction}"

    def lhs_weight(self, gamma: np.ndarray) -> np.ndarray:
        if self.variant == "power":
            return gamma ** self.alpha
        if self.variant == "log":
            return np.log(SHIFT + gamma) / np.sqrt(gamma)
        return self.rho.weight(gamma)

    def rhs_weight(self, gamma: np.ndarray) -> np.ndarray:
        if self.variant == "power":
            return gamma ** (self.alpha + 1.0)
        if self.variant == "log":
            return np.sqrt(gamma) * np.log(SHIFT + gamma) ** 2
        return self.rho.rho(gamma) ** 2 / (np.sqrt(gamma) * self.rho.derivative(gamma))

    def mixed_weight(self, gamma: np.ndarray) -> np.ndarray:
        return self.lhs_weight(gamma)


def parse_weight(spec: str) -> WeightSpec:
    """
    "power:alpha=-0.4", "log", "rho:log-shift", "rho:power,beta=0.3"; направление - параметр dir=1|2.
    """
    kind, params = parse_spec(spec, "weight")
    direction = int(spec_float(params, ["dir", "direction"], "weight", default=1))
    if kind == "power":
        return WeightSpec("power", alpha=spec_float(params, ["alpha", "0"], "weight"), direction=direction)
    if kind == "log":
        return WeightSpec("log", direction=direction)
    if kind in ("rho", "general"):
        if "0" not in params:
            raise ConfigError({"weight": "не задано имя функции rho"})
        return WeightSpec("general", rho=parse_rho(params["0"], params, "weight"), direction=direction)
    raise ConfigError({"weight": f"неизвестный вес '{spec}'"})


# Квадратура

@dataclass
class Integrands:
    """Значения подынтегральных выражений в узлах квадратуры и их веса"""
    weights: np.ndarray
    lhs: np.ndarray
    rhs: np.ndarray
    mixed: np.ndarray
    annulus: np.ndarray

    def totals(self) -> Dict[str, float]:
        w = self.weights
        return {
            "lhs": float(np.sum(w * self.lhs)),
            "rhs": float(np.sum(w * self.rhs)),
            "S": float(np.sum(w * self.mixed)),
            "T1": float(np.sum(w * self.lhs * self.annulus)),
        }


def _integrands(density: Density, gradients: np.ndarray, hessians: Optional[np.ndarray], points: np.ndarray,
                cutoff: CutoffProfile, weight: WeightSpec) -> Integrands:
    i = weight.direction - 1
    eta = cutoff.eta(points)
    d_eta = cutoff.gradient(points)
    forms = density.hessian_matrix(gradients)
    partial = gradients[:, i]
    gamma = 1.0 + partial ** 2

    rhs = apply_form(forms, d_eta, d_eta) * weight.rhs_weight(gamma)
    if hessians is None:
        lhs = mixed = np.zeros(len(points))
    else:
        row = hessians[:, i, :]
        lhs = eta ** 2 * apply_form(forms, row, row) * weight.lhs_weight(gamma)
        mixed = eta * partial * apply_form(forms, row, d_eta) * weight.mixed_weight(gamma)
    return Integrands(np.ones(len(points)), lhs, rhs, mixed, cutoff.in_annulus(points).astype(float))


def _midpoint_totals(density: Density, field: Field, cutoff: CutoffProfile, weight: WeightSpec,
                     resolution: int, need_hessian: bool, chunk: int = 1 << 18) -> Dict[str, float]:
    """Средние точки n x n ячеек квадрата [-2R, 2R]^2, вне круга B_2R подынтегральные выражения равны нулю"""
    outer = cutoff.outer
    step = 2.0 * outer / resolution
    axis = -outer + step * (np.arange(resolution) + 0.5)
    totals = {"lhs": 0.0, "rhs": 0.0, "S": 0.0, "T1": 0.0}
    rows_per_chunk = max(1, chunk // resolution)
    for start in range(0, resolution, rows_per_chunk):
        xx, yy = np.meshgrid(axis, axis[start:start + rows_per_chunk], indexing='xy')
        points = np.stack([xx.ravel(), yy.ravel()], axis=-1)
        points = points[np.linalg.norm(points, axis=-1) < outer]
        if not len(points):
            continue
        hessians = field.hessian(points) if need_hessian else None
        part = _integrands(density, field.gradient(points), hessians, points, cutoff, weight).totals()
        for key in totals:
            totals[key] += part[key] * step ** 2
    return totals


def _relative_change(a: Dict[str, float], b: Dict[str, float]) -> float:
    scale = max(abs(a["lhs"]), abs(a["rhs"]), 1e-300)
    return max(abs(a[key] - b[key]) for key in a) / scale


def integrate(density: Density, field: Field, cutoff: CutoffProfile, weight: WeightSpec,
              need_hessian: bool = True, resolution: int | None = None,
              max_resolution: int | None = None, rtol: float | None = None) -> Tuple[Dict[str, float], str]:
    """
    Интегралы lhs, rhs, S, T1.

    Для поля, заданного формулой, - средние точки с удвоением разрешения до совпадения двух
    последовательных значений с точностью rtol. Для дискретного поля - одна точка в центре
    масс каждого элемента.

    :return: Кортеж (словарь интегралов, описание квадратуры).
    """
    if need_hessian and not field.has_hessian:
        raise MissingSecondDerivatives(f"У поля {field.name} нет вторых производных")

    if isinstance(field, DiscreteField):
        mesh = field.mesh
        points = mesh.centroids
        hessians = field.element_hessians if need_hessian else None
        integrands = _integrands(density, field.element_gradients(), hessians, points, cutoff, weight)
        integrands.weights = mesh.areas
        return integrands.totals(), f"centroid:{len(mesh.elements)}"

    resolution = resolution or Config.QUAD_RESOLUTION
    max_resolution = max_resolution or Config.QUAD_MAX_RESOLUTION
    rtol = Config.QUAD_RTOL if rtol is None else rtol
    current = _midpoint_totals(density, field, cutoff, weight, resolution, need_hessian)
    while 2 * resolution <= max_resolution:
        refined = _midpoint_totals(density, field, cutoff, weight, 2 * resolution, need_hessian)
        change = _relative_change(current, refined)
        current, resolution = refined, 2 * resolution
        if change <= rtol:
            break
        logging.info(f"Квадратура: разрешение {resolution}, относительное изменение {change:.2e}")
    return current, f"midpoint:{resolution}"


def weighted_lhs(density: Density, field: Field, cutoff: CutoffProfile, weight: WeightSpec, **quadrature) -> float:
    return integrate(density, field, cutoff, weight, **quadrature)[0]["lhs"]


def weighted_rhs(density: Density, field: Field, cutoff: CutoffProfile, weight: WeightSpec, **quadrature) -> float:
    return integrate(density, field, cutoff, weight, need_hessian=False, **quadrature)[0]["rhs"]


def mixed_term(density: Density, field: Field, cutoff: CutoffProfile, weight: WeightSpec, **quadrature) -> float:
    return integrate(density, field, cutoff, weight, **quadrature)[0]["S"]


def annulus_terms(density: Density, field: Field, cutoff: CutoffProfile, weight: WeightSpec,
                  **quadrature) -> Tuple[float, float]:
    """(T1, T2): lhs на кольце R < |x| < 2R и rhs"""
    totals = integrate(density, field, cutoff, weight, **quadrature)[0]
    return totals["T1"], totals["rhs"]


def caccioppoli_report(density: Density, field: Field, R: float, weight: WeightSpec, **quadrature) -> CaccioppoliReport:
    cutoff = CutoffProfile(R)
    totals, resolution = integrate(density, field, cutoff, weight, **quadrature)
    ratio = totals["lhs"] / totals["rhs"] if totals["rhs"] > 0 else float("inf")
    return CaccioppoliReport(
        R=R, lhs=totals["lhs"], rhs=totals["rhs"], ratio=ratio, T1=totals["T1"], T2=totals["rhs"],
        S=totals["S"], weight=weight.describe(), resolution=resolution,
    )


def measured_constants(reports: Sequence[CaccioppoliReport]) -> List[CaccioppoliReport]:
    """
    Проставляет в отчеты серии константу C(R) = max lhs/rhs по радиусам R' <= R.

    Радиусы со сбоем решателя пропускаются.
    """
    ordered = sorted(reports, key=lambda report: report.R)
    constant = float("nan")
    updated = {}
    for report in ordered:
        if report.ok and np.isfinite(report.ratio):
            constant = report.ratio if np.isnan(constant) else max(constant, report.ratio)
        updated[report.R] = report.model_copy(update={"constant": None if np.isnan(constant) else constant})
    return [updated[report.R] for report in reports]


# Серия радиусов

def _solve_and_measure(density: Density, boundary_field: Field, R: float, weight: WeightSpec, h: float,
                       tol: float) -> CaccioppoliReport:
    mesh = disk_mesh(2.0 * R, h)
    solution, solve_report = minimize(density, mesh, boundary_field, tol=tol)
    report = caccioppoli_report(density, solution, R, weight)
    return report.model_copy(update={"solve": solve_report})


def _failed_report(R: float, weight: WeightSpec, error: Exception) -> CaccioppoliReport:
    solve = getattr(error, "report", None)
    nan = float("nan")
    return CaccioppoliReport(R=R, lhs=nan, rhs=nan, ratio=nan, T1=nan, T2=nan, S=nan, weight=weight.describe(),
                             resolution="", solve=solve, error=f"{type(error).__name__}: {error}")


async def wrapped_radius(density: Density, boundary_field: Field, R: float, weight: WeightSpec, h: float,
                         tol: float, semaphore: asyncio.Semaphore) -> Tuple[float, CaccioppoliReport]:
    async with semaphore:
        try:
            report = await asyncio.to_thread(_solve_and_measure, density, boundary_field, R, weight, h, tol)
        except LabError as e:
            logging.warning(f"R = {R:g}: {e}")
            report = _failed_report(R, weight, e)
    return R, report


async def decay_sweep_async(density: Density, boundary_field: Field, radii: Sequence[float], weight: WeightSpec,
                            h: float, tol: float = 1e-8, max_concurrent_tasks: int | None = None) -> List[CaccioppoliReport]:
    radii = [float(R) for R in radii]
    if any(b <= a for a, b in zip(radii, radii[1:])) or not radii or radii[0] <= 0:
        raise ConfigError({"R": "радиусы должны быть положительными и возрастать"})
    semaphore = asyncio.Semaphore(max_concurrent_tasks or Config.THREADS)
    tasks = [asyncio.create_task(wrapped_radius(density, boundary_field, R, weight, h, tol, semaphore))
             for R in radii]

    results: Dict[float, CaccioppoliReport] = {}
    for task in asyncio.as_completed(tasks):
        R, report = await task
        results[R] = report
        logging.info(f"R = {R:g}: T1 = {report.T1:.6g}, T2 = {report.T2:.6g}, lhs/rhs = {report.ratio:.4g}")
    return measured_constants([results[R] for R in radii])


def decay_sweep(density: Density, boundary_field: Field, radii: Sequence[float], weight: WeightSpec, h: float,
                tol: float = 1e-8, max_concurrent_tasks: int | None = None) -> List[CaccioppoliReport]:
    """
    Для каждого R решает задачу в круге B_2R с граничными данными boundary_field и измеряет
    lhs, rhs, T1, T2 и константу C(R) из measured_constants.
    Ошибка решателя на одном радиусе записывается в его отчет, серия продолжается.
    """
    return asyncio.run(decay_sweep_async(density, boundary_field, radii, weight, h, tol, max_concurrent_tasks))
