"""Shared fixtures and curve factories."""

import json

import numpy as np
import pytest

from src import shapes
from src.config import ENV_VAR, AppConfig
from src.curve_core import CurvatureProfile, GroupElement, PlanarCurve, apply_group


@pytest.fixture(autouse=True)
def isolated_config(tmp_path, monkeypatch):
    """Point config resolution at an empty temp file so ~/.sigcurve is never read."""
    path = tmp_path / "sigcurve" / "config.yaml"
    monkeypatch.setenv(ENV_VAR, str(path))
    return path


@pytest.fixture
def config():
    return AppConfig.defaults()


@pytest.fixture
def fast_config():
    """Coarser grids for Monte Carlo harnesses."""
    return AppConfig.defaults().replace(resample_nodes=512, integrator_steps=1024, workers=2)


@pytest.fixture
def spiral():
    return shapes.log_spiral()


@pytest.fixture
def ellipse():
    return shapes.ellipse(2.0, 1.0)


@pytest.fixture
def write_json(tmp_path):
    def _write(name: str, data) -> str:
        path = tmp_path / name
        path.write_text(json.dumps(data), encoding="utf-8")
        return str(path)
    return _write


def rigid_image(curve: PlanarCurve, angle: float = 0.7, translation=(3.0, -1.0)) -> PlanarCurve:
    return apply_group(GroupElement.rotation(angle, translation), curve)


def linear_profile(c0: float, c1: float, c2: float = 0.0, length: float = 1.0, n: int = 2001) -> CurvatureProfile:
    """κ = c0 + c1 s + c2 s² with its exact derivative column."""
    return CurvatureProfile.from_callables(
        length, n,
        lambda s: c0 + c1 * s + c2 * s ** 2,
        lambda s: c1 + 2 * c2 * s,
    )


def sign_changes(values: np.ndarray, floor: float = 1e-8) -> int:
    """Cyclic sign changes, ignoring values below `floor`."""
    signs = np.sign(values[np.abs(values) > floor])
    return int(np.count_nonzero(signs != np.roll(signs, 1)))
