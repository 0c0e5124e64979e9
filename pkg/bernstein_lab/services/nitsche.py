"""
Критерий Ничше: расходимость интеграла от 1 до бесконечности функции

    Theta(t) = (1/t) (1 + t lambda(t)) / (2 + t lambda(t)),   lambda = 2 f''/f',  f(t) = g(sqrt(t)),

означает существование неаффинных целых решений.

Интеграл разбивается на диадические блоки [2^k, 2^(k+1)]; суммы S_k приближаются хвостами
a rho^k (сходится), a (расходится), a/(k+b) и a/(k ln k) (расходятся).
"""
import logging
from typing import Dict, List, Tuple

import numpy as np
from scipy.integrate import quad

from bernstein_lab.core.config import Config
from bernstein_lab.core.exceptions import DegenerateProfile, DomainError, NonNearlyLinear
from bernstein_lab.models.reports import ConditionReport, NitscheReport
from bernstein_lab.services.density import DensityModel, Density, one_plus_t_lambda, require_profile
from bernstein_lab.services.functions import log_spaced

# Порядок перечисления задает приоритет при равных остатках: меньше параметров - выше
MODEL_PARAMETERS = {"constant": 1, "log-harmonic": 1, "geometric-decay": 2, "harmonic": 2}
DIVERGENT_MODELS = {"constant", "harmonic", "log-harmonic"}


def theta(density: Density, t):
    """
    Theta(t) через lambda-форму: при q = 1 + t lambda(t) имеем Theta = q / (t (1 + q)).

    :param density: Плотность с радиальным профилем.
    :param t: Точка (или массив) t >= 1.
    :return: Theta(t).
    """
    t_arr = np.asarray(t, dtype=float)
    q = one_plus_t_lambda(density, t_arr)
    if np.any(1.0 + q == 0):
        raise DegenerateProfile(f"2 + t lambda(t) = 0 для плотности {density.spec}")
    values = q / (t_arr * (1.0 + q))
    return float(values) if t_arr.ndim == 0 else values


def theta_g_form(density: Density, t):
    """Альтернативная форма 1 / (1 + sqrt(t) g'(sqrt(t)) / g''(sqrt(t))); совпадает с Theta лишь асимптотически"""
    radial = require_profile(density)
    t_arr = np.asarray(t, dtype=float)
    r = np.sqrt(t_arr)
    values = 1.0 / (1.0 + r * radial.dg(r) / radial.d2g(r))
    return float(values) if t_arr.ndim == 0 else values


def dyadic_sums(density: Density, levels: int, epsabs: float = 1e-10) -> List[Tuple[int, float]]:
    """
    Интегралы Theta по блокам [2^k, 2^(k+1)], k = 0..levels-1 (адаптивная квадратура Гаусса-Кронрода).
    """
    sums = []
    for k in range(levels):
        value, error = quad(lambda t: theta(density, t), 2.0 ** k, 2.0 ** (k + 1),
                            epsabs=epsabs, epsrel=1e-12, limit=200)
        sums.append((k, float(value)))
    return sums


def _relative_residual(values: np.ndarray, model: np.ndarray) -> float:
    return float(np.sqrt(np.mean(((values - model) / values) ** 2)))


def fit_tail_models(levels: np.ndarray, values: np.ndarray) -> Dict[str, Tuple[float, Dict[str, float]]]:
    """
    Подгонка хвостов к диадическим суммам.

    constant:        S_k = a
    geometric-decay: S_k = a rho^k, rho < 1 (линейная регрессия ln S_k)
    harmonic:        S_k = a / (k + b) (линейная регрессия 1/S_k)
    log-harmonic:    S_k = a / (k ln k)

    :return: Словарь {модель: (относительный остаток, параметры)}; модели с недопустимыми
             параметрами (rho >= 1, убывание не гармоническое) не попадают в словарь.
    """
    k = levels.astype(float)
    fits: Dict[str, Tuple[float, Dict[str, float]]] = {}

    a = float(np.mean(values))
    fits["constant"] = (_relative_residual(values, np.full_like(values, a)), {"a": a})

    slope, intercept = np.polyfit(k, np.log(values), 1)
    rho = float(np.exp(slope))
    if rho < 1.0:
        model = np.exp(intercept) * rho ** k
        fits["geometric-decay"] = (_relative_residual(values, model), {"a": float(np.exp(intercept)), "rho": rho})

    slope, intercept = np.polyfit(k, 1.0 / values, 1)
    if slope > 0:
        a_h, b_h = 1.0 / slope, intercept / slope
        if np.all(k + b_h > 0):
            fits["harmonic"] = (_relative_residual(values, a_h / (k + b_h)), {"a": float(a_h), "b": float(b_h)})

    if np.all(k >= 2):
        shape = 1.0 / (k * np.log(k))
        a_l = float(np.dot(values, shape) / np.dot(shape, shape))
        fits["log-harmonic"] = (_relative_residual(values, a_l * shape), {"a": a_l})
    return fits


def select_model(fits: Dict[str, Tuple[float, Dict[str, float]]], tie_tolerance: float = 1e-3) -> str:
    """Простейшая модель среди тех, чей остаток не хуже наилучшего больше чем на tie_tolerance"""
    best = min(residual for residual, _ in fits.values())
    candidates = [name for name, (residual, _) in fits.items() if residual <= best + tie_tolerance]
    return min(candidates, key=lambda name: (MODEL_PARAMETERS[name], fits[name][0]))


def classify_divergence(density: Density, t_max: float | None = None, levels: int = 20,
                        threshold: float | None = None) -> NitscheReport:
    """
    Классифицирует интеграл Theta по [1, бесконечность).

    :param density: Плотность с радиальным профилем.
    :param t_max: Верхняя граница выборки, t_max >= 2^levels (по умолчанию 2^levels).
    :param levels: Количество диадических блоков, не меньше 8.
    :param threshold: Порог относительного остатка, выше которого ответ "inconclusive".
    :return: Отчет NitscheReport.
    """
    if levels < 8:
        raise DomainError(f"Нужно не меньше 8 уровней, получено {levels}")
    t_max = float(2 ** levels) if t_max is None else float(t_max)
    if t_max < 2 ** levels:
        raise DomainError(f"t_max = {t_max:g} меньше 2^levels = {2 ** levels}")
    threshold = Config.NITSCHE_THRESHOLD if threshold is None else threshold
    require_profile(density)

    sums = dyadic_sums(density, levels)
    values = np.array([s for _, s in sums])
    if np.any(values <= 0):
        raise DegenerateProfile(f"Theta меняет знак для плотности {density.spec}")

    tail = np.arange(levels // 2, levels)
    fits = fit_tail_models(tail, values[tail])
    model = select_model(fits)
    residual, parameters = fits[model]

    if residual > threshold:
        classification = "inconclusive"
    elif model in DIVERGENT_MODELS:
        classification = "diverges"
    else:
        classification = "converges"

    ratio = float(theta_g_form(density, t_max) / theta(density, t_max))
    logging.info(f"Ничше {density.spec}: {classification}, модель {model}, остаток {residual:.3g}, "
                 f"отношение форм Theta {ratio:.4g}")
    return NitscheReport(
        density=density.spec, classification=classification, dyadic_sums=sums,
        fitted_model=model, fit_residual=residual, model_parameters=parameters,
        residuals={name: fit[0] for name, fit in fits.items()},
        t_max=t_max, levels=levels, cross_check_ratio=ratio,
        form_discrepancy=bool(abs(ratio - 1.0) > 0.1),
    )


def theta_lower_bound_check(density: DensityModel, t_min: float = 1e2, t_max: float = 1e8, samples: int = 200,
                            interval: Tuple[float, float] = (0.5, 2.5)) -> ConditionReport:
    """
    Оценки для почти линейного роста при t >> 1:

        c1 t ln(1+sqrt t) <= sqrt(t) g'(sqrt t)/g''(sqrt t) <= c2 t ln(1+sqrt t),
        Theta(t) t ln(1+t) >= c5 > 0.

    :param interval: Интервал, в котором должно лежать измеренное отношение [c1, c2].
    :return: Отчет с измеренным интервалом в details.
    """
    if not getattr(density, "is_nearly_linear", False):
        raise NonNearlyLinear(f"Оценка снизу для Theta применима только к почти линейному росту, "
                              f"а не к {density.spec}")
    if t_min < 1e2 or t_max > 1e12 or t_min >= t_max:
        raise DomainError(f"Диапазон [{t_min:g}, {t_max:g}] вне [1e2, 1e12]")
    radial = require_profile(density)

    t = log_spaced(t_min, t_max, samples)
    r = np.sqrt(t)
    ratio = r * radial.dg(r) / radial.d2g(r) / (t * np.log1p(r))
    product = theta(density, t) * t * np.log1p(t)

    c1, c2 = float(ratio.min()), float(ratio.max())
    c5 = float(product.min())
    holds = bool(c5 > 0 and interval[0] < c1 and c2 < interval[1])
    index = int(np.argmin(product)) if c5 <= 0 else int(np.argmax(np.abs(ratio - 0.5 * sum(interval))))
    logging.info(f"Оценка Theta для {density.spec}: отношение в [{c1:.4f}, {c2:.4f}], "
                 f"min Theta t ln(1+t) = {c5:.4f}")
    return ConditionReport(
        hypothesis="theta-lower-bound", holds=holds, constant=c5,
        witness_point=None if holds else [float(t[index]), 0.0],
        witness_lhs=None if holds else float(ratio[index]),
        witness_rhs=None if holds else float(interval[1] if ratio[index] > interval[0] else interval[0]),
        sample_range=[t_min, t_max], sample_description=f"{samples} точек t",
        details={"ratio_interval": [c1, c2], "theta_product_min": c5},
    )
