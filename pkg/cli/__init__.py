"""
Command-line interface package.

This package provides the CLI for corpus generation, feature
extraction, training, evaluation, α grid search and gradient checks.
"""

from .main import main, cli_main

__all__ = ['main', 'cli_main']
