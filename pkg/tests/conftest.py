"""Shared fixtures."""

import logging

import pytest

from attractor_lab.config import reset_settings
from attractor_lab.spectral.core import ModeGrid


@pytest.fixture
def grid_1d():
    return ModeGrid(dimension=1, modes=8, length=1.0)


@pytest.fixture
def grid_3d():
    return ModeGrid(dimension=3, modes=4, length=1.0)


@pytest.fixture
def isolated_settings(tmp_path, monkeypatch):
    """Point every environment-level path into tmp_path."""
    monkeypatch.setenv("ATTRACTOR_LAB_OUTPUT_DIR", str(tmp_path / "runs"))
    monkeypatch.setenv("ATTRACTOR_LAB_REGISTRY_PATH", str(tmp_path / "registry.db"))
    monkeypatch.setenv("ATTRACTOR_LAB_LOG_FILE", str(tmp_path / "attractor_lab.log"))
    reset_settings()
    yield tmp_path
    reset_settings()
    logger = logging.getLogger("attractor_lab")
    for handler in list(logger.handlers):
        logger.removeHandler(handler)
        handler.close()
