"""
Минимизация J[u] = sum_T |T| f(grad u|_T) по кусочно-линейным полям с условием Дирихле.

Метод Ньютона с регуляризацией delta*Id, отступлением по Армихо и запасным шагом
градиентного спуска. Сборка векторизована по элементам, глобальные векторы и матрицы
собираются детерминированно (bincount / coo -> csr).
"""
import logging
from dataclasses import dataclass
from typing import Callable, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.sparse import coo_matrix, csr_matrix, identity
from scipy.sparse.linalg import splu

from bernstein_lab.core.config import Config
from bernstein_lab.core.exceptions import NoConvergence, OutOfRange, SingularSystem
from bernstein_lab.models.reports import SolveReport
from bernstein_lab.services.density import Density
from bernstein_lab.services.fields import ClosedFormField, DiscreteField, Field, affine
from bernstein_lab.services.mesh import Mesh

ARMIJO = 1e-4
MAX_BACKTRACKS = 40
DELTA_START = 1e-8
DELTA_MAX = 1e4


@dataclass
class Assembly:
    energy: float
    gradient: np.ndarray
    hessian: csr_matrix | None = None


def _element_gradients(mesh: Mesh, values: np.ndarray) -> np.ndarray:
    return np.einsum('mi,mid->md', values[mesh.elements], mesh.shape_gradients)


def assemble(density: Density, mesh: Mesh, values: np.ndarray, with_hessian: bool = True) -> Assembly:
    """
    Энергия, ее градиент по узловым значениям и (по запросу) разреженная матрица Гессе.

    :param density: Плотность энергии.
    :param mesh: Сетка.
    :param values: Узловые значения (N,).
    :param with_hessian: Собирать ли матрицу Гессе.
    """
    areas = mesh.areas
    shape = mesh.shape_gradients
    grads = _element_gradients(mesh, values)

    energy = float(np.sum(areas * density.eval(grads)))
    local = areas[:, None] * np.einsum('md,mid->mi', density.gradient(grads), shape)
    gradient = np.bincount(mesh.elements.ravel(), weights=local.ravel(), minlength=len(mesh.nodes))

    hessian = None
    if with_hessian:
        forms = density.hessian_matrix(grads)
        local_h = areas[:, None, None] * np.einsum('mid,mde,mje->mij', shape, forms, shape)
        rows = np.repeat(mesh.elements, 3, axis=1).ravel()
        cols = np.tile(mesh.elements, (1, 3)).ravel()
        n = len(mesh.nodes)
        hessian = coo_matrix((local_h.ravel(), (rows, cols)), shape=(n, n)).tocsr()
    return Assembly(energy, gradient, hessian)


def energy(density: Density, field: DiscreteField) -> float:
    """J[u] = sum |T| f(grad u|_T); точна для кусочно-линейных полей"""
    grads = field.element_gradients()
    return float(np.sum(field.mesh.areas * density.eval(grads)))


def euler_residual(density: Density, field: DiscreteField) -> float:
    """Норма градиента дискретной энергии во внутренних узлах"""
    assembly = assemble(density, field.mesh, field.values, with_hessian=False)
    return float(np.linalg.norm(assembly.gradient[field.mesh.interior_nodes]))


def boundary_values(mesh: Mesh, boundary_data) -> np.ndarray:
    """
    Значения на границе из поля, функции точек или массива значений во всех узлах.
    """
    nodes = mesh.nodes[mesh.boundary_nodes]
    if isinstance(boundary_data, Field):
        return np.asarray(boundary_data.value(nodes), dtype=float)
    if callable(boundary_data):
        return np.asarray(boundary_data(nodes), dtype=float)
    data = np.asarray(boundary_data, dtype=float)
    if data.shape == (len(mesh.nodes),):
        return data[mesh.boundary_nodes]
    if data.shape == (len(mesh.boundary_nodes),):
        return data
    raise ValueError(f"Граничные данные формы {data.shape} не соответствуют сетке {mesh}")


def harmonic_extension(mesh: Mesh, values_on_boundary: np.ndarray) -> np.ndarray:
    """Дискретно-гармоническое продолжение граничных значений; аффинные данные продолжаются точно"""
    n = len(mesh.nodes)
    shape = mesh.shape_gradients
    local = mesh.areas[:, None, None] * np.einsum('mid,mjd->mij', shape, shape)
    rows = np.repeat(mesh.elements, 3, axis=1).ravel()
    cols = np.tile(mesh.elements, (1, 3)).ravel()
    stiffness = coo_matrix((local.ravel(), (rows, cols)), shape=(n, n)).tocsr()

    u = np.zeros(n)
    u[mesh.boundary_nodes] = values_on_boundary
    interior = mesh.interior_nodes
    if len(interior):
        rhs = -stiffness[interior][:, mesh.boundary_nodes] @ values_on_boundary
        u[interior] = splu(stiffness[interior][:, interior].tocsc()).solve(rhs)
    return u


def _newton_direction(hessian: csr_matrix, gradient: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    Решает (H + delta Id) d = -g, начиная с delta = 0 и далее 1e-8, 1e-7, ...

    :return: Направление спуска и использованное delta.
    :raises SingularSystem: Если ни одна регуляризация не дала решения.
    """
    n = hessian.shape[0]
    eye = identity(n, format='csr')
    delta = 0.0
    solved = False
    while delta <= DELTA_MAX:
        try:
            direction = splu((hessian + delta * eye).tocsc()).solve(-gradient)
        except RuntimeError:
            direction = None
        if direction is not None and np.all(np.isfinite(direction)):
            solved = True
            if gradient @ direction < 0:
                return direction, delta
        delta = DELTA_START if delta == 0.0 else delta * 10
        logging.info(f"Регуляризация матрицы Гессе: delta = {delta:g}")
    if not solved:
        raise SingularSystem(f"Матрица Гессе вырождена при delta <= {DELTA_MAX:g}")
    return -gradient, np.inf


def _line_search(objective: Callable[[np.ndarray], float], u: np.ndarray, current: float,
                 direction: np.ndarray, slope: float) -> Tuple[np.ndarray | None, float, int]:
    """Отступление по Армихо с делением шага пополам; допуск на ошибки округления энергии"""
    slack = 1e-13 * (abs(current) + 1.0)
    step = 1.0
    for backtracks in range(MAX_BACKTRACKS + 1):
        trial = u + step * direction
        value = objective(trial)
        if np.isfinite(value) and value <= current + ARMIJO * step * slope + slack:
            return trial, value, backtracks
        step *= 0.5
    return None, current, MAX_BACKTRACKS


def minimize(density: Density, mesh: Mesh, boundary_data, tol: float = 1e-10,
             max_iters: int = 100) -> Tuple[DiscreteField, SolveReport]:
    """
    Дискретное решение div[Df(grad u)] = 0 с условием Дирихле.

    :param density: Строго выпуклая плотность.
    :param mesh: Сетка области.
    :param boundary_data: Поле, функция точек или массив значений (на границе или во всех узлах).
    :param tol: Допуск на норму невязки во внутренних узлах.
    :param max_iters: Наибольшее число итераций Ньютона.
    :return: Кортеж (решение, отчет).
    :raises NoConvergence: С лучшим приближением и отчетом, если допуск не достигнут.
    :raises SingularSystem: Если матрица Гессе вырождена даже после регуляризации.
    """
    interior = mesh.interior_nodes
    u = harmonic_extension(mesh, boundary_values(mesh, boundary_data))

    def objective(values: np.ndarray) -> float:
        return float(np.sum(mesh.areas * density.eval(_element_gradients(mesh, values))))

    assembly = assemble(density, mesh, u)
    history = [assembly.energy]
    total_backtracks, gradient_steps, max_delta = 0, 0, 0.0
    residual = float(np.linalg.norm(assembly.gradient[interior]))
    iterations = 0
    converged = residual <= tol

    while not converged and iterations < max_iters:
        g = assembly.gradient[interior]
        hessian = assembly.hessian[interior][:, interior]
        direction, delta = _newton_direction(hessian, g)
        if np.isfinite(delta):
            max_delta = max(max_delta, delta)
        else:
            gradient_steps += 1

        full = np.zeros_like(u)
        full[interior] = direction
        trial, value, backtracks = _line_search(objective, u, assembly.energy, full, float(g @ direction))
        if trial is None and np.isfinite(delta):
            # Направление Ньютона не дало убывания - шаг градиентного спуска
            gradient_steps += 1
            full[interior] = -g
            trial, value, extra = _line_search(objective, u, assembly.energy, full, -float(g @ g))
            backtracks += extra
        total_backtracks += backtracks
        iterations += 1
        if trial is None:
            logging.warning(f"Итерация {iterations}: поиск шага не дал убывания энергии, остановка")
            break

        u = trial
        assembly = assemble(density, mesh, u)
        history.append(assembly.energy)
        residual = float(np.linalg.norm(assembly.gradient[interior]))
        converged = residual <= tol
        logging.info(f"Итерация {iterations}: энергия {assembly.energy:.12g}, невязка {residual:.3e}, "
                      f"отступлений {backtracks}, delta {delta:g}")

    field = DiscreteField(mesh, u, name="solution")
    norms = np.linalg.norm(field.element_gradients(), axis=-1)
    large = int(np.sum(norms > Config.LARGE_GRADIENT))
    if large:
        logging.info(f"Элементов с |grad u| > {Config.LARGE_GRADIENT:g}: {large}")
    report = SolveReport(
        iterations=iterations, energy=assembly.energy, residual=residual, backtracks=total_backtracks,
        converged=converged, gradient_steps=gradient_steps, regularization=max_delta,
        energy_history=history, max_gradient=float(norms.max()) if len(norms) else 0.0,
        large_gradient_elements=large, nodes=len(mesh.nodes), elements=len(mesh.elements),
    )
    if not converged:
        raise NoConvergence(max_iters, best_field=field, report=report)
    return field, report


# Сведение к ОДУ для u = a x1 + phi(x2)

def monotone_invert(density: Density, a: float, c: float, tol: float = 1e-12) -> float:
    """
    Единственное y с df/dp2(a, y) = c.

    Скобка расширяется удвоением, корень находится методом Брента и уточняется шагами Ньютона.

    :raises OutOfRange: Если c вне области значений y -> df/dp2(a, y).
    """
    def partial2(y: float) -> float:
        return float(density.gradient(np.array([a, y]))[1])

    start = partial2(0.0)
    if c == start:
        return 0.0
    sign = 1.0 if c > start else -1.0
    near, far = 0.0, sign
    while sign * (partial2(far) - c) <= 0:
        near, far = far, 2.0 * far
        if abs(far) > 1e150:
            raise OutOfRange(f"c = {c:g} вне области значений df/dp2({a:g}, y)")

    low, high = min(near, far), max(near, far)
    y = brentq(lambda t: partial2(t) - c, low, high, xtol=tol, rtol=4 * np.finfo(float).eps, maxiter=500)
    for _ in range(3):
        slope = density.hessian(np.array([a, y])).a22
        if slope <= 0:
            break
        step = (partial2(y) - c) / slope
        candidate = y - step
        if not low <= candidate <= high:
            break
        y = candidate
        if abs(step) <= tol:
            break
    return float(y)


def ode_profile(density: Density, a: float, c: float) -> ClosedFormField:
    """u = a x1 + phi(x2) с phi' = monotone_invert(a, c); решение уравнения - аффинное поле"""
    return affine(a, monotone_invert(density, a, c), 0.0)
