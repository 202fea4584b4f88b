"""
Logging configuration for the application.

This module provides centralized logging setup with proper
formatters, handlers, and rotation policies.
"""

import logging
import logging.handlers
import sys
from pathlib import Path
from typing import Optional

from .settings import LoggingSettings


def setup_logging(settings: Optional[LoggingSettings] = None,
                  level: Optional[str] = None) -> None:
    """
    Setup application logging with the given settings.

    Args:
        settings: Logging settings. If None, will use the global settings.
        level: Optional level override (e.g. from a --log-level flag).
    """
    if settings is None:
        from .settings import get_settings
        settings = get_settings().logging

    log_level = getattr(logging, (level or settings.level).upper(), logging.INFO)

    formatter = logging.Formatter(settings.format)

    root_logger = logging.getLogger()
    root_logger.setLevel(log_level)

    # Clear any existing handlers
    root_logger.handlers.clear()

    console_handler = logging.StreamHandler(sys.stderr)
    console_handler.setFormatter(formatter)
    console_handler.setLevel(log_level)
    root_logger.addHandler(console_handler)

    if settings.file_path:
        try:
            log_path = Path(settings.file_path)
            log_path.parent.mkdir(parents=True, exist_ok=True)

            file_handler = logging.handlers.RotatingFileHandler(
                settings.file_path,
                maxBytes=settings.max_file_size,
                backupCount=settings.backup_count,
                encoding='utf-8'
            )
            file_handler.setFormatter(formatter)
            file_handler.setLevel(log_level)
            root_logger.addHandler(file_handler)

            logging.info(f"Logging to file: {settings.file_path}")

        except OSError as e:
            logging.warning(f"Failed to setup file logging: {e}")

    logging.debug("Logging system initialized")
