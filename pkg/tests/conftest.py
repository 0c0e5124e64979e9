import numpy as np
import pytest

from bernstein_lab.core.config import Config
from bernstein_lab.services import density as densities

BUILTIN_DENSITIES = ["minimal-surface", "power:s=1.5", "power:s=2", "power:s=3", "nearly-linear",
                     "regularized:eps=0.1"]


@pytest.fixture(params=BUILTIN_DENSITIES)
def builtin_density(request):
    return densities.parse_density(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


@pytest.fixture
def coarse_quadrature(monkeypatch):
    """Небольшое разрешение квадратуры для команд CLI"""
    monkeypatch.setattr(Config, "QUAD_RESOLUTION", 128)
    monkeypatch.setattr(Config, "QUAD_MAX_RESOLUTION", 256)


@pytest.fixture(autouse=True)
def no_ledger(monkeypatch):
    monkeypatch.setattr(Config, "DB_NAME", "")
