"""
Application settings and configuration.

This module provides centralized, environment-backed configuration
for logging, compute resources and output locations. Experiment
hyperparameters live in ``src.models``; this module only covers
process-level concerns.
"""

import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from dotenv import load_dotenv

from src.exceptions import ConfigurationError

# Load environment variables
load_dotenv()


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None:
        return default
    try:
        return int(raw)
    except ValueError as e:
        raise ConfigurationError(f"{name} must be an integer, got {raw!r}") from e


@dataclass
class LoggingSettings:
    """Settings for logging configuration."""
    level: str = "INFO"
    format: str = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
    file_path: Optional[str] = None
    max_file_size: int = 10 * 1024 * 1024  # 10MB
    backup_count: int = 5


@dataclass
class ComputeSettings:
    """Settings for numerical work and worker pools."""
    threads: int = 1
    train_dtype: str = "float32"


@dataclass
class OutputSettings:
    """Settings for generated artifacts."""
    output_dir: str = "runs"


@dataclass
class Settings:
    """Main application settings."""
    logging: LoggingSettings = field(default_factory=LoggingSettings)
    compute: ComputeSettings = field(default_factory=ComputeSettings)
    output: OutputSettings = field(default_factory=OutputSettings)

    @classmethod
    def from_env(cls) -> 'Settings':
        """Create settings from environment variables."""

        log_file = os.getenv('FUSION_LOG_FILE')
        if log_file:
            Path(log_file).parent.mkdir(parents=True, exist_ok=True)

        logging_settings = LoggingSettings(
            level=os.getenv('FUSION_LOG_LEVEL', 'INFO').upper(),
            file_path=log_file,
            max_file_size=_int_env("FUSION_LOG_MAX_BYTES", 10 * 1024 * 1024),
            backup_count=_int_env("FUSION_LOG_BACKUPS", 5)
        )

        compute = ComputeSettings(
            threads=_int_env("FUSION_THREADS", 1),
            train_dtype=os.getenv('FUSION_TRAIN_DTYPE', 'float32'),
        )

        output = OutputSettings(
            output_dir=os.getenv('FUSION_OUTPUT_DIR', 'runs'),
        )

        return cls(
            logging=logging_settings,
            compute=compute,
            output=output,
        )

    def validate(self) -> None:
        """Validate settings and raise errors for invalid configurations."""

        valid_log_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
        if self.logging.level not in valid_log_levels:
            raise ConfigurationError(f"Log level must be one of {valid_log_levels}")

        if self.logging.max_file_size <= 0:
            raise ConfigurationError("Log file size must be positive")

        if self.compute.threads <= 0:
            raise ConfigurationError("Thread count must be positive")

        if self.compute.train_dtype not in ('float32', 'float64'):
            raise ConfigurationError(f"Unsupported training dtype: {self.compute.train_dtype}")


# Global settings instance
_settings: Optional[Settings] = None


def get_settings() -> Settings:
    """Get the global settings instance."""
    global _settings
    if _settings is None:
        settings = Settings.from_env()
        settings.validate()
        _settings = settings
    return _settings


def reload_settings() -> Settings:
    """Reload settings from environment."""
    global _settings
    _settings = None
    return get_settings()
