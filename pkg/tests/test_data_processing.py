import numpy as np
import pandas as pd
import pytest

from bernstein_lab.core.exceptions import ConfigError
from bernstein_lab.services import density as densities
from bernstein_lab.services import solver
from bernstein_lab.services.caccioppoli import caccioppoli_report, parse_weight
from bernstein_lab.services.data_processing import FileService
from bernstein_lab.services.fields import DiscreteField, log_ridge, parse_field, product
from bernstein_lab.services.mesh import disk_mesh, square_mesh


def test_solution_csv_roundtrip(tmp_path):
    mesh = square_mesh(1.0, 0.25)
    field = DiscreteField.interpolate(product(), mesh)
    path = FileService.export_solution(field, str(tmp_path / "nested" / "u.csv"))

    loaded = FileService.import_field(path)
    assert len(loaded.mesh.nodes) == len(mesh.nodes)
    assert loaded.mesh.areas.sum() == pytest.approx(4.0)
    points = np.array([[0.25, 0.5], [-0.5, -0.75]])
    assert np.allclose(loaded.value(points), product().value(points))


def test_from_file_field(tmp_path):
    path = tmp_path / "plane.csv"
    axis = np.linspace(-1.0, 1.0, 5)
    xx, yy = np.meshgrid(axis, axis)
    pd.DataFrame({'x': xx.ravel(), 'y': yy.ravel(), 'u': 2.0 * xx.ravel() - yy.ravel()}).to_csv(path, index=False)
    field = parse_field(f"from-file:{path}")
    assert np.allclose(field.element_gradients(), [2.0, -1.0])


def test_read_table_errors(tmp_path):
    with pytest.raises(ConfigError):
        FileService.read_table(str(tmp_path / "u.xlsx"), ['x'])
    with pytest.raises(ConfigError):
        FileService.read_table(str(tmp_path / "missing.csv"), ['x'])

    empty = tmp_path / "empty.csv"
    empty.write_text("", encoding='utf-8')
    with pytest.raises(ConfigError):
        FileService.read_table(str(empty), ['x'])

    partial = tmp_path / "partial.csv"
    pd.DataFrame({'x': [0.0, 1.0, 0.0], 'y': [0.0, 0.0, 1.0]}).to_csv(partial, index=False)
    with pytest.raises(ConfigError) as info:
        FileService.import_field(str(partial))
    assert "u" in info.value.message


def test_saved_solution_gives_same_caccioppoli_terms(tmp_path):
    f = densities.nearly_linear()
    solution, _ = solver.minimize(f, disk_mesh(1.0, 0.1), log_ridge(), tol=1e-10)
    path = FileService.export_solution(solution, str(tmp_path / "u.csv"))
    loaded = parse_field(f"from-file:{path}")

    weight = parse_weight("power:alpha=-0.4")
    direct = caccioppoli_report(f, solution, 0.5, weight)
    reloaded = caccioppoli_report(f, loaded, 0.5, weight)
    assert np.array_equal(loaded.mesh.nodes, solution.mesh.nodes)
    for key in ("lhs", "rhs", "S", "T1"):
        assert getattr(reloaded, key) == pytest.approx(getattr(direct, key), rel=1e-12, abs=1e-300)
    assert direct.lhs > 0
