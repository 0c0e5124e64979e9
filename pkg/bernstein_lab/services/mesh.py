"""
Треугольные сетки для кусочно-линейных (P1) полей: квадрат [-L, L]^2 и вписанный многоугольник круга B_R.
"""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.spatial import Delaunay

from bernstein_lab.core.exceptions import ConfigError, DegenerateDomain
from bernstein_lab.services.functions import parse_spec, spec_float


@dataclass(frozen=True, eq=False)
class Mesh:
    """
    Конформная триангуляция.

    nodes - координаты узлов (N, 2); elements - тройки индексов узлов (M, 3) с положительной
    ориентацией; boundary_nodes - индексы узлов на границе области.
    """
    domain: str
    h: float
    nodes: np.ndarray
    elements: np.ndarray
    boundary_nodes: np.ndarray

    @cached_property
    def signed_areas(self) -> np.ndarray:
        x = self.nodes[self.elements]
        e1, e2 = x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]
        return 0.5 * (e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0])

    @property
    def areas(self) -> np.ndarray:
        return np.abs(self.signed_areas)

    @cached_property
    def shape_gradients(self) -> np.ndarray:
        """Градиенты барицентрических координат, массив (M, 3, 2)"""
        x = self.nodes[self.elements]
        two_area = 2.0 * self.signed_areas
        grads = np.empty((len(self.elements), 3, 2))
        for i in range(3):
            j, k = (i + 1) % 3, (i + 2) % 3
            grads[:, i, 0] = (x[:, j, 1] - x[:, k, 1]) / two_area
            grads[:, i, 1] = (x[:, k, 0] - x[:, j, 0]) / two_area
        return grads

    @cached_property
    def centroids(self) -> np.ndarray:
        return self.nodes[self.elements].mean(axis=1)

    @cached_property
    def interior_nodes(self) -> np.ndarray:
        mask = np.ones(len(self.nodes), dtype=bool)
        mask[self.boundary_nodes] = False
        return np.flatnonzero(mask)

    @cached_property
    def node_to_element(self):
        """Разреженная матрица инцидентности узел-элемент (N, M)"""
        from scipy.sparse import coo_matrix
        rows = self.elements.ravel()
        cols = np.repeat(np.arange(len(self.elements)), 3)
        return coo_matrix((np.ones(len(rows)), (rows, cols)),
                          shape=(len(self.nodes), len(self.elements))).tocsr()

    def edge_lengths(self) -> np.ndarray:
        x = self.nodes[self.elements]
        return np.linalg.norm(x - np.roll(x, -1, axis=1), axis=-1)

    def mapped(self, matrix: np.ndarray, domain: str | None = None) -> "Mesh":
        """Образ сетки при линейном отображении x -> A x; ориентация элементов сохраняется положительной"""
        matrix = np.asarray(matrix, dtype=float)
        elements = self.elements.copy()
        if np.linalg.det(matrix) < 0:
            elements = elements[:, [0, 2, 1]]
        return Mesh(domain or f"mapped({self.domain})", self.h, self.nodes @ matrix.T, elements,
                    self.boundary_nodes.copy())

    def __repr__(self) -> str:
        return f"<Mesh({self.domain}, h={self.h:g}, nodes={len(self.nodes)}, elements={len(self.elements)})>"


def _oriented(nodes: np.ndarray, elements: np.ndarray) -> np.ndarray:
    x = nodes[elements]
    e1, e2 = x[:, 1] - x[:, 0], x[:, 2] - x[:, 0]
    negative = e1[:, 0] * e2[:, 1] - e1[:, 1] * e2[:, 0] < 0
    elements = elements.copy()
    elements[negative] = elements[negative][:, [0, 2, 1]]
    return elements


def square_mesh(L: float, h: float) -> Mesh:
    """
    Квадрат [-L, L]^2: n = ceil(2L/h) ячеек на сторону, каждая ячейка делится одной диагональю.
    """
    if not (L > 0 and h > 0):
        raise DegenerateDomain(f"Размеры квадрата должны быть положительны: L={L}, h={h}")
    n = max(1, int(np.ceil(2 * L / h - 1e-9)))
    axis = np.linspace(-L, L, n + 1)
    xx, yy = np.meshgrid(axis, axis, indexing='xy')
    nodes = np.stack([xx.ravel(), yy.ravel()], axis=-1)

    index = np.arange((n + 1) ** 2).reshape(n + 1, n + 1)
    lower_left = index[:-1, :-1].ravel()
    lower_right = index[:-1, 1:].ravel()
    upper_left = index[1:, :-1].ravel()
    upper_right = index[1:, 1:].ravel()
    elements = np.concatenate([
        np.stack([lower_left, lower_right, upper_right], axis=-1),
        np.stack([lower_left, upper_right, upper_left], axis=-1),
    ])

    on_boundary = np.isclose(np.abs(nodes), L).any(axis=1)
    mesh = Mesh(f"square:L={L:g}", h, nodes, elements, np.flatnonzero(on_boundary))
    logging.info(f"Сетка квадрата L={L:g}: {len(nodes)} узлов, {len(elements)} элементов")
    return mesh


def disk_mesh(R: float, h: float) -> Mesh:
    """
    Вписанный многоугольник круга радиуса R: концентрические кольца с шагом не больше h,
    хорды на каждом кольце не длиннее h, триангуляция Делоне.
    """
    if not (R > 0 and h > 0):
        raise DegenerateDomain(f"Радиус и шаг должны быть положительны: R={R}, h={h}")
    rings = max(1, int(np.ceil(R / h - 1e-9)))
    points = [np.zeros((1, 2))]
    boundary = None
    offset = 1
    for i in range(1, rings + 1):
        radius = R * i / rings
        count = max(6, int(np.ceil(2 * np.pi * radius / h)))
        shift = 0.5 * (i % 2) * 2 * np.pi / count
        angles = shift + 2 * np.pi * np.arange(count) / count
        ring = radius * np.stack([np.cos(angles), np.sin(angles)], axis=-1)
        points.append(ring)
        if i == rings:
            boundary = np.arange(offset, offset + count)
        offset += count
    nodes = np.vstack(points)

    elements = _oriented(nodes, Delaunay(nodes).simplices.astype(np.int64))
    mesh = Mesh(f"disk:R={R:g}", h, nodes, elements, boundary)
    degenerate = int(np.sum(mesh.areas < 1e-12 * h ** 2))
    if degenerate:
        logging.warning(f"Сетка круга R={R:g}: {degenerate} вырожденных элементов")
    logging.info(f"Сетка круга R={R:g}: {len(nodes)} узлов, {len(elements)} элементов")
    return mesh


def mesh_from_points(points: np.ndarray, h: float | None = None) -> Mesh:
    """
    Триангуляция Делоне произвольного набора узлов (например, из CSV решения).
    Граничные узлы - вершины выпуклой оболочки и узлы, лежащие на ее сторонах.
    """
    points = np.asarray(points, dtype=float)
    triangulation = Delaunay(points)
    elements = _oriented(points, triangulation.simplices.astype(np.int64))
    hull = triangulation.convex_hull
    on_hull = np.zeros(len(points), dtype=bool)
    on_hull[np.unique(hull)] = True
    for a, b in hull:
        edge = points[b] - points[a]
        rel = points - points[a]
        cross = np.abs(edge[0] * rel[:, 1] - edge[1] * rel[:, 0])
        along = rel @ edge
        on_hull |= (cross <= 1e-10 * np.dot(edge, edge)) & (along >= 0) & (along <= np.dot(edge, edge))
    if h is None:
        x = points[elements]
        h = float(np.linalg.norm(x - np.roll(x, -1, axis=1), axis=-1).max())
    return Mesh("points", h, points, elements, np.flatnonzero(on_hull))


def build_mesh(domain: str, h: float) -> Mesh:
    """
    Строит сетку по строке области.

    :param domain: "square:L=2" или "disk:R=1" (также "polygonal-disk:R=1").
    :param h: Целевая длина ребра.
    :return: Сетка.
    """
    kind, params = parse_spec(domain, "domain")
    if kind == "square":
        return square_mesh(spec_float(params, ["L", "0"], "domain"), h)
    if kind in ("disk", "polygonal-disk"):
        return disk_mesh(spec_float(params, ["R", "0"], "domain"), h)
    raise ConfigError({"domain": f"неизвестная область '{domain}'"})
