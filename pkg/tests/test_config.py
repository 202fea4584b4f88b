"""
Tests for environment-backed settings and logging setup.
"""

import logging
import logging.handlers
import sys
from pathlib import Path

import pytest

# Add project root to path
sys.path.insert(0, str(Path(__file__).parent.parent))

from config import Settings, reload_settings, setup_logging
from config.settings import LoggingSettings
from src.exceptions import ConfigurationError


class TestSettings:

    def test_defaults(self, monkeypatch):
        for key in ("FUSION_THREADS", "FUSION_OUTPUT_DIR", "FUSION_LOG_LEVEL", "FUSION_TRAIN_DTYPE"):
            monkeypatch.delenv(key, raising=False)
        settings = Settings.from_env()
        assert settings.compute.threads == 1
        assert settings.compute.train_dtype == "float32"
        assert settings.output.output_dir == "runs"
        assert settings.logging.level == "INFO"

    def test_environment_overrides(self, monkeypatch, tmp_path):
        monkeypatch.setenv("FUSION_THREADS", "4")
        monkeypatch.setenv("FUSION_OUTPUT_DIR", str(tmp_path))
        monkeypatch.setenv("FUSION_LOG_LEVEL", "debug")
        settings = reload_settings()
        assert settings.compute.threads == 4
        assert settings.output.output_dir == str(tmp_path)
        assert settings.logging.level == "DEBUG"
        monkeypatch.undo()
        reload_settings()

    def test_invalid_threads(self):
        settings = Settings()
        settings.compute.threads = 0
        with pytest.raises(ConfigurationError):
            settings.validate()

    def test_invalid_dtype(self):
        settings = Settings()
        settings.compute.train_dtype = "float16"
        with pytest.raises(ConfigurationError, match="float16"):
            settings.validate()

    def test_non_integer_environment_value(self, monkeypatch):
        monkeypatch.setenv("FUSION_THREADS", "many")
        with pytest.raises(ConfigurationError, match="FUSION_THREADS"):
            Settings.from_env()


class TestLogging:

    def test_level_override_and_file_handler(self, tmp_path):
        log_file = tmp_path / "logs" / "run.log"
        setup_logging(LoggingSettings(file_path=str(log_file)), level="WARNING")
        root = logging.getLogger()
        assert root.level == logging.WARNING
        assert any(isinstance(h, logging.handlers.RotatingFileHandler) for h in root.handlers)
        logging.getLogger("src.test").warning("written")
        for handler in root.handlers:
            handler.flush()
        assert "written" in log_file.read_text()
        setup_logging(LoggingSettings())
