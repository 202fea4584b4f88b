"""
Gradient-check suite over every differentiable building block.
"""

from .case_registry import CaseRegistry, CaseResult, GradCheckCase, case_registry, run_case
from .cases import ProgramCase, initialize_cases, toy_model_config

__all__ = [
    'CaseRegistry', 'CaseResult', 'GradCheckCase', 'case_registry', 'run_case',
    'ProgramCase', 'initialize_cases', 'toy_model_config',
]
