"""Tests for environment settings and logging setup."""

import logging
from pathlib import Path

import pytest

from attractor_lab.config import get_settings, reset_settings
from attractor_lab.utils.logging_config import get_logger, setup_logging


class TestSettings:
    """ATTRACTOR_LAB_* variables."""

    def test_environment_overrides(self, isolated_settings, monkeypatch):
        monkeypatch.setenv("ATTRACTOR_LAB_MAX_WORKERS", "3")
        reset_settings()
        settings = get_settings()
        assert settings.output_dir == isolated_settings / "runs"
        assert settings.registry_path == isolated_settings / "registry.db"
        assert settings.max_workers == 3

    def test_cached(self, isolated_settings):
        assert get_settings() is get_settings()

    def test_home_expanded(self, isolated_settings, monkeypatch):
        monkeypatch.setenv("ATTRACTOR_LAB_OUTPUT_DIR", "~/lab-runs")
        reset_settings()
        assert get_settings().output_dir == Path.home() / "lab-runs"

    def test_invalid_value(self, isolated_settings, monkeypatch):
        monkeypatch.setenv("ATTRACTOR_LAB_MAX_WORKERS", "0")
        reset_settings()
        with pytest.raises(RuntimeError, match="ATTRACTOR_LAB_"):
            get_settings()


class TestLogging:
    """Package logger configuration."""

    def test_file_receives_debug(self, isolated_settings):
        log_file = isolated_settings / "logs" / "lab.log"
        logger = setup_logging(log_file)
        get_logger("attractor_lab.tests").debug("bisection converged")
        for handler in logger.handlers:
            handler.flush()
        assert "bisection converged" in log_file.read_text(encoding="utf-8")

    def test_repeated_setup_replaces_handlers(self, isolated_settings):
        setup_logging(isolated_settings / "a.log")
        logger = setup_logging(isolated_settings / "b.log", verbose=True)
        assert len(logger.handlers) == 2
        assert logger.handlers[0].level == logging.DEBUG

    def test_foreign_names_nested(self):
        assert get_logger("scripts.sweep").name == "attractor_lab.scripts.sweep"
        assert get_logger("attractor_lab.metrics").name == "attractor_lab.metrics"
        assert get_logger().name == "attractor_lab"
