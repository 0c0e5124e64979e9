"""
Поля u: R^2 -> R двух видов.

ClosedFormField - поле, заданное формулами (значение, градиент, матрица Гессе), дает точные
производные в любой точке. DiscreteField - кусочно-линейное поле на сетке (выход решателя);
градиент постоянен на элементах, вторые производные восстанавливаются усреднением градиентов
в узлах с последующим дифференцированием по элементам.
"""
from abc import ABC, abstractmethod
from functools import cached_property
from typing import Callable, Optional

import numpy as np
from matplotlib.tri import Triangulation

from bernstein_lab.core.exceptions import ConfigError, MissingSecondDerivatives
from bernstein_lab.services.functions import parse_spec, spec_float
from bernstein_lab.services.mesh import Mesh

PointFunction = Callable[[np.ndarray], np.ndarray]


class Field(ABC):
    """Поле с первыми производными; вторые производные могут отсутствовать"""
    name: str = "field"

    @abstractmethod
    def value(self, points: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def gradient(self, points: np.ndarray) -> np.ndarray:
        ...

    @abstractmethod
    def hessian(self, points: np.ndarray) -> np.ndarray:
        ...

    @property
    def has_hessian(self) -> bool:
        return True

    def __repr__(self) -> str:
        return f"<{type(self).__name__}({self.name})>"


class ClosedFormField(Field):
    def __init__(self, name: str, value: PointFunction, gradient: PointFunction,
                 hessian: Optional[PointFunction] = None):
        self.name = name
        self._value = value
        self._gradient = gradient
        self._hessian = hessian

    @property
    def has_hessian(self) -> bool:
        return self._hessian is not None

    def value(self, points):
        return self._value(np.asarray(points, dtype=float))

    def gradient(self, points):
        return self._gradient(np.asarray(points, dtype=float))

    def hessian(self, points):
        if self._hessian is None:
            raise MissingSecondDerivatives(f"У поля {self.name} нет вторых производных")
        return self._hessian(np.asarray(points, dtype=float))

    def composed(self, matrix: np.ndarray, name: str | None = None) -> "ClosedFormField":
        """u~(x) = u(A x): градиент A^T Du(Ax), Гессе A^T D2u(Ax) A"""
        matrix = np.asarray(matrix, dtype=float)

        def mapped(x):
            return np.asarray(x, dtype=float) @ matrix.T

        hessian = None
        if self._hessian is not None:
            def hessian(x):
                return np.einsum('ki,...kl,lj->...ij', matrix, self._hessian(mapped(x)), matrix)

        return ClosedFormField(
            name or f"{self.name}(Ax)",
            value=lambda x: self._value(mapped(x)),
            gradient=lambda x: self._gradient(mapped(x)) @ matrix,
            hessian=hessian,
        )


class DiscreteField(Field):
    """Кусочно-линейное поле: значения в узлах сетки"""

    def __init__(self, mesh: Mesh, values: np.ndarray, name: str = "discrete"):
        values = np.asarray(values, dtype=float)
        if values.shape != (len(mesh.nodes),):
            raise ValueError(f"Ожидалось {len(mesh.nodes)} значений в узлах, получено {values.shape}")
        self.mesh = mesh
        self.values = values
        self.name = name

    @classmethod
    def interpolate(cls, field: Field, mesh: Mesh) -> "DiscreteField":
        return cls(mesh, np.asarray(field.value(mesh.nodes), dtype=float), name=f"I_h {field.name}")

    def with_values(self, values: np.ndarray) -> "DiscreteField":
        return DiscreteField(self.mesh, values, self.name)

    def element_gradients(self, values: np.ndarray | None = None) -> np.ndarray:
        """Градиенты на элементах (M, 2) для значений в узлах (по умолчанию - собственных)"""
        values = self.values if values is None else values
        return np.einsum('mi,mid->md', values[self.mesh.elements], self.mesh.shape_gradients)

    @cached_property
    def recovered_gradient(self) -> np.ndarray:
        """Градиент в узлах (N, 2): среднее градиентов соседних элементов с весами-площадями"""
        weighted = self.element_gradients() * self.mesh.areas[:, None]
        incidence = self.mesh.node_to_element
        total = incidence @ self.mesh.areas
        return (incidence @ weighted) / total[:, None]

    @cached_property
    def element_hessians(self) -> np.ndarray:
        """Восстановленная матрица Гессе на элементах (M, 2, 2), симметризованная"""
        recovered = self.recovered_gradient
        rows = np.stack([self.element_gradients(recovered[:, 0]), self.element_gradients(recovered[:, 1])], axis=1)
        return 0.5 * (rows + np.swapaxes(rows, 1, 2))

    @cached_property
    def _trifinder(self):
        triangulation = Triangulation(self.mesh.nodes[:, 0], self.mesh.nodes[:, 1], self.mesh.elements)
        return triangulation.get_trifinder()

    def locate(self, points: np.ndarray) -> np.ndarray:
        """Индекс элемента для каждой точки, -1 вне сетки"""
        points = np.asarray(points, dtype=float)
        return np.asarray(self._trifinder(points[:, 0], points[:, 1]), dtype=np.int64)

    def value(self, points):
        points = np.asarray(points, dtype=float)
        index = self.locate(points)
        result = np.full(len(points), np.nan)
        inside = index >= 0
        elements = self.mesh.elements[index[inside]]
        x0 = self.mesh.nodes[elements[:, 0]]
        grads = self.element_gradients()[index[inside]]
        result[inside] = self.values[elements[:, 0]] + np.sum(grads * (points[inside] - x0), axis=-1)
        return result

    def gradient(self, points):
        index = self.locate(points)
        result = np.full((len(index), 2), np.nan)
        result[index >= 0] = self.element_gradients()[index[index >= 0]]
        return result

    def hessian(self, points):
        index = self.locate(points)
        result = np.full((len(index), 2, 2), np.nan)
        result[index >= 0] = self.element_hessians[index[index >= 0]]
        return result


# Поля, заданные формулами

def affine(a: float, b: float, c: float = 0.0) -> ClosedFormField:
    return ClosedFormField(
        f"affine:a={a:g},b={b:g},c={c:g}",
        value=lambda x: a * x[..., 0] + b * x[..., 1] + c,
        gradient=lambda x: np.broadcast_to(np.array([a, b], dtype=float), x.shape).copy(),
        hessian=lambda x: np.zeros(x.shape[:-1] + (2, 2)),
    )


def product() -> ClosedFormField:
    """u = x1 x2 - неаффинное целое решение для степенной плотности s = 2"""
    return ClosedFormField(
        "product",
        value=lambda x: x[..., 0] * x[..., 1],
        gradient=lambda x: np.stack([x[..., 1], x[..., 0]], axis=-1),
        hessian=lambda x: np.broadcast_to(np.array([[0.0, 1.0], [1.0, 0.0]]), x.shape[:-1] + (2, 2)).copy(),
    )


def scherk() -> ClosedFormField:
    """Поверхность Шерка u = ln(cos x1 / cos x2), определена при |x1|, |x2| < pi/2"""
    def hessian(x):
        h = np.zeros(x.shape[:-1] + (2, 2))
        h[..., 0, 0] = -1.0 / np.cos(x[..., 0]) ** 2
        h[..., 1, 1] = 1.0 / np.cos(x[..., 1]) ** 2
        return h

    return ClosedFormField(
        "scherk",
        value=lambda x: np.log(np.cos(x[..., 0])) - np.log(np.cos(x[..., 1])),
        gradient=lambda x: np.stack([-np.tan(x[..., 0]), np.tan(x[..., 1])], axis=-1),
        hessian=hessian,
    )


def log_balanced() -> ClosedFormField:
    """u = x2^2/2 + (x1/2) ln(1 + x2^2): d1 u растет логарифмически"""
    def gradient(x):
        x1, x2 = x[..., 0], x[..., 1]
        return np.stack([0.5 * np.log1p(x2 ** 2), x2 + x1 * x2 / (1.0 + x2 ** 2)], axis=-1)

    def hessian(x):
        x1, x2 = x[..., 0], x[..., 1]
        h = np.zeros(x.shape[:-1] + (2, 2))
        h[..., 0, 1] = h[..., 1, 0] = x2 / (1.0 + x2 ** 2)
        h[..., 1, 1] = 1.0 + x1 * (1.0 - x2 ** 2) / (1.0 + x2 ** 2) ** 2
        return h

    return ClosedFormField(
        "log-balanced",
        value=lambda x: 0.5 * x[..., 1] ** 2 + 0.5 * x[..., 0] * np.log1p(x[..., 1] ** 2),
        gradient=gradient,
        hessian=hessian,
    )


def sublinear() -> ClosedFormField:
    """u = x1 + x2 s(x2), s(y) = ln(1 + y^2)/2: |d1 u| = 1, условие баланса с любым m"""
    def hessian(x):
        x2 = x[..., 1]
        h = np.zeros(x.shape[:-1] + (2, 2))
        h[..., 1, 1] = x2 / (1.0 + x2 ** 2) + 2.0 * x2 / (1.0 + x2 ** 2) ** 2
        return h

    return ClosedFormField(
        "sublinear",
        value=lambda x: x[..., 0] + 0.5 * x[..., 1] * np.log1p(x[..., 1] ** 2),
        gradient=lambda x: np.stack([np.ones_like(x[..., 0]),
                                     0.5 * np.log1p(x[..., 1] ** 2) + x[..., 1] ** 2 / (1.0 + x[..., 1] ** 2)],
                                    axis=-1),
        hessian=hessian,
    )


def log_ridge() -> ClosedFormField:
    """
    u = x1 + ln(1 + x2^2), то есть x1 + x2 s(x2) с s(y) = ln(1 + y^2)/y.

    Градиент ограничен, |d1 u| = 1; после растяжения x -> Rx неаффинная часть убывает как ln(R)/R.
    """
    def hessian(x):
        x2 = x[..., 1]
        h = np.zeros(x.shape[:-1] + (2, 2))
        h[..., 1, 1] = 2.0 * (1.0 - x2 ** 2) / (1.0 + x2 ** 2) ** 2
        return h

    return ClosedFormField(
        "log-ridge",
        value=lambda x: x[..., 0] + np.log1p(x[..., 1] ** 2),
        gradient=lambda x: np.stack([np.ones_like(x[..., 0]), 2.0 * x[..., 1] / (1.0 + x[..., 1] ** 2)], axis=-1),
        hessian=hessian,
    )


def parse_field(spec: str, field: str = "field") -> Field:
    """
    Строит поле по строке спецификации.

    :param spec: "affine:a=1,b=2,c=0" (или "affine:1,2,0"), "product", "scherk", "log-balanced",
                 "sublinear", "log-ridge" или "from-file:u.csv".
    :param field: Имя поля конфигурации для сообщений об ошибках.
    """
    if spec.strip().lower().startswith("from-file:"):
        from bernstein_lab.services.data_processing import FileService
        return FileService.import_field(spec.strip()[len("from-file:"):].strip())

    kind, params = parse_spec(spec, field)
    if kind == "affine":
        return affine(spec_float(params, ["a", "0"], field), spec_float(params, ["b", "1"], field),
                      spec_float(params, ["c", "2"], field, default=0.0))
    builders = {"product": product, "scherk": scherk, "log-balanced": log_balanced, "sublinear": sublinear,
                "log-ridge": log_ridge}
    if kind not in builders:
        raise ConfigError({field: f"неизвестное поле '{spec}'"})
    return builders[kind]()
