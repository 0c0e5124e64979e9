import re
from typing import Dict, List, Tuple

import numpy as np

from bernstein_lab.core.exceptions import ConfigError


def parse_spec(spec: str, field: str = "spec") -> Tuple[str, Dict[str, str]]:
    """
    Разбирает строку спецификации вида "вид:ключ=значение,ключ=значение".

    Допускаются позиционные значения без ключей ("affine:1,2,0"), они получают
    ключи "0", "1", ... в порядке следования.

    :param spec: Строка спецификации, например "power:s=1.5" или "disk:R=100".
    :param field: Имя поля конфигурации для сообщения об ошибке.
    :return: Кортеж (вид, словарь параметров).
    """
    if not spec or not spec.strip():
        raise ConfigError({field: "пустая спецификация"})

    kind, _, rest = spec.strip().partition(':')
    kind = kind.strip().lower()
    if not re.fullmatch(r'[a-z][a-z0-9\-_]*', kind):
        raise ConfigError({field: f"неизвестный вид '{kind}'"})

    params: Dict[str, str] = {}
    if rest.strip():
        for position, item in enumerate(rest.split(',')):
            item = item.strip()
            if not item:
                continue
            if '=' in item:
                key, _, value = item.partition('=')
                params[key.strip()] = value.strip()
            else:
                params[str(position)] = item
    return kind, params


def spec_float(params: Dict[str, str], names: List[str], field: str, default: float | None = None) -> float:
    """
    Достает числовой параметр по одному из допустимых имен (или позиции).

    :param params: Параметры из parse_spec.
    :param names: Допустимые имена, первое совпадение используется.
    :param field: Имя поля конфигурации для сообщения об ошибке.
    :param default: Значение по умолчанию; None означает обязательный параметр.
    :return: Значение параметра.
    """
    for name in names:
        if name in params:
            try:
                return float(params[name])
            except ValueError:
                raise ConfigError({field: f"параметр '{name}' не является числом: {params[name]}"})
    if default is None:
        raise ConfigError({field: f"не задан параметр '{names[0]}'"})
    return default


def log_spaced(start: float, stop: float, count: int) -> np.ndarray:
    """Логарифмически равномерные точки на [start, stop] включительно."""
    return np.logspace(np.log10(start), np.log10(stop), count)


def polar_samples(radius: float, n_angles: int = 64, n_radii: int = 48, r_min: float = 1e-2) -> np.ndarray:
    """
    Полярная сетка точек в круге: n_angles углов на логарифмически равномерных радиусах.

    Углы k*2pi/n_angles содержат направления осей, где сосредоточены контрпримеры
    вида x1*x2.

    :param radius: Радиус круга.
    :param n_angles: Количество углов.
    :param n_radii: Количество радиусов.
    :param r_min: Наименьший радиус (относительно radius при radius < 1).
    :return: Массив точек (N, 2), включая начало координат.
    """
    r_low = min(r_min, radius * r_min)
    radii = log_spaced(r_low, radius, n_radii)
    angles = 2.0 * np.pi * np.arange(n_angles) / n_angles
    rr, aa = np.meshgrid(radii, angles, indexing='ij')
    points = np.stack([rr * np.cos(aa), rr * np.sin(aa)], axis=-1).reshape(-1, 2)
    return np.vstack([np.zeros((1, 2)), points])
