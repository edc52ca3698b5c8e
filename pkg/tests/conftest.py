import pytest

from src.config import Config
from src.tools.grid_fourier import GridSpec
from src.tools.sphere_quadrature import circle_rule, sphere_rule


@pytest.fixture(autouse=True)
def _isolated_paths(tmp_path, monkeypatch):
    monkeypatch.setattr(Config, "LOG_FILE", str(tmp_path / "logs" / "lab.log"))
    monkeypatch.setattr(Config, "REPORT_DIR", str(tmp_path / "reports"))


@pytest.fixture
def plane_grid():
    """d = 2 grid with spacing 0.5; the unit circle sits well inside its frequency box"""
    return GridSpec(d=2, L=16.0, n=64)


@pytest.fixture
def space_grid():
    return GridSpec(d=3, L=8.0, n=32)


@pytest.fixture
def circle():
    return circle_rule(64)


@pytest.fixture
def sphere():
    return sphere_rule(12, 24)
