"""
Иерархия ошибок лаборатории.

Каждый класс знает код завершения CLI, в который он отображается:
0 - успех, 2 - конфигурация, 3 - решатель, 4 - диагностика, 5 - внутренняя ошибка.
"""
from typing import Any, Dict, List


class LabError(Exception):
    """Базовая ошибка лаборатории"""
    exit_code = 5

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details = details


class ConfigError(LabError):
    """Некорректная конфигурация запуска. Содержит сообщения по каждому полю."""
    exit_code = 2

    def __init__(self, errors: Dict[str, str]):
        self.errors = dict(errors)
        listing = "; ".join(f"{field}: {text}" for field, text in self.errors.items())
        super().__init__(f"Некорректная конфигурация: {listing}")

    @property
    def fields(self) -> List[str]:
        return list(self.errors)


class DomainError(LabError):
    """Аргумент вне области определения функции"""
    exit_code = 4


class DegenerateDomain(LabError):
    """Неположительные размеры области или шага сетки"""
    exit_code = 2


class DegenerateProfile(LabError):
    """Радиальный профиль вырождается в точке запроса (деление на ноль)"""
    exit_code = 4


class NonRadialDensity(DegenerateProfile):
    """У плотности нет радиального профиля"""


class NonNearlyLinear(LabError):
    """Проверка применима только к плотностям почти линейного роста"""
    exit_code = 4


class NoConvergence(LabError):
    """Метод Ньютона не сошелся. Хранит лучшее приближение и отчет."""
    exit_code = 3

    def __init__(self, max_iters: int, best_field: Any = None, report: Any = None):
        super().__init__(f"Нет сходимости за {max_iters} итераций")
        self.max_iters = max_iters
        self.best_field = best_field
        self.report = report


class SingularSystem(LabError):
    """Матрица Гессе вырождена даже после регуляризации"""
    exit_code = 3


class SweepIncomplete(LabError):
    """Серия радиусов завершена, но на части радиусов решатель дал ошибку"""
    exit_code = 3


class OutOfRange(LabError):
    """Значение вне области значений монотонной функции"""
    exit_code = 4


class WeightInadmissible(LabError):
    """Недопустимый вес (alpha <= -1/2 или rho не удовлетворяет условиям)"""
    exit_code = 4


class MissingSecondDerivatives(LabError):
    """Для поля недоступны вторые производные"""
    exit_code = 4


class SingularFrame(LabError):
    """Векторы E1, E2 линейно зависимы"""
    exit_code = 4


class DiagnosticFailed(LabError):
    """Диагностика выполнена, но проверяемое условие не выполнено"""
    exit_code = 4


class LedgerError(LabError):
    """Журнал запусков недоступен для записи или чтения"""
    exit_code = 5
