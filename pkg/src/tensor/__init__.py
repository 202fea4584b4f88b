"""
Minimal dense tensors with reverse-mode automatic differentiation.
"""

from .tensor import Tape, Tensor, active_tape, backward, no_tape
from .params import ParamStore
from .gradcheck import GradCheckReport, ParameterCheck, grad_check
from . import ops

__all__ = [
    'Tape', 'Tensor', 'active_tape', 'backward', 'no_tape',
    'ParamStore', 'GradCheckReport', 'ParameterCheck', 'grad_check', 'ops',
]
