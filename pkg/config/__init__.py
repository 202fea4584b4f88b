"""
Configuration management package.

This package provides process-level configuration for the fusion
emotion toolkit: environment-backed settings and logging setup.
"""

from .settings import Settings, get_settings, reload_settings
from .logging_config import setup_logging

__all__ = ['Settings', 'get_settings', 'reload_settings', 'setup_logging']
