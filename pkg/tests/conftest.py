import json

import pytest

import config
from mesh_builder import GridSpec
from weierstrass_core import validate_params

SIMPLE = {"m": 1, "n": 0, "a": [1.0, 2.0], "b": [], "alpha": [1], "beta": []}
MIXED = {"m": 1, "n": 1, "a": [1.0, 2.0], "b": [-1.0, -2.0], "alpha": [1], "beta": [1]}


@pytest.fixture
def simple():
    """Type (1, 0), one cone on [1, 2] pointing down."""
    return validate_params(SIMPLE)


@pytest.fixture
def mixed():
    """Type (1, 1) with a horizontal end: w(0) = 1."""
    return validate_params(MIXED)


@pytest.fixture
def coarse_grid():
    return GridSpec(radial_samples=24, angular_samples=12, seam_refinement=1)


@pytest.fixture(autouse=True)
def export_dir(tmp_path, monkeypatch):
    folder = tmp_path / "exports"
    monkeypatch.setattr(config, "EXPORT_DIR", str(folder))
    return folder


@pytest.fixture
def write_config(tmp_path):
    def write(data, name="run.json"):
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)
    return write
