"""
Adam with bias-corrected moment estimates.
"""

from dataclasses import dataclass, field
from typing import Dict, Mapping

import numpy as np

from ..exceptions import DimensionError
from ..models import TrainConfig
from ..tensor import ParamStore


@dataclass
class AdamState:
    step: int = 0
    m: Dict[str, np.ndarray] = field(default_factory=dict)
    v: Dict[str, np.ndarray] = field(default_factory=dict)

    @classmethod
    def zeros_like(cls, params: ParamStore) -> 'AdamState':
        return cls(
            step=0,
            m={name: np.zeros_like(p.data) for name, p in params.items()},
            v={name: np.zeros_like(p.data) for name, p in params.items()},
        )


def adam_step(params: ParamStore, grads: Mapping[str, np.ndarray], state: AdamState,
              cfg: TrainConfig) -> AdamState:
    """
    Apply one Adam update to every parameter in place.

    m ← β1·m + (1-β1)·g, v ← β2·v + (1-β2)·g², then
    p ← p - lr·m̂/(√v̂ + ε) with m̂ = m/(1-β1^t), v̂ = v/(1-β2^t).
    """
    state.step += 1
    t = state.step
    b1, b2 = cfg.adam_beta1, cfg.adam_beta2
    correction1 = 1.0 - b1 ** t
    correction2 = 1.0 - b2 ** t

    for name, param in params.items():
        grad = grads[name]
        m, v = state.m[name], state.v[name]
        if grad.shape != param.shape or m.shape != param.shape or v.shape != param.shape:
            raise DimensionError(f"Adam shapes disagree for {name}", param.shape, grad.shape, m.shape)
        m = b1 * m + (1.0 - b1) * grad
        v = b2 * v + (1.0 - b2) * grad * grad
        update = cfg.learning_rate * (m / correction1) / (np.sqrt(v / correction2) + cfg.adam_eps)
        param.data = (param.data - update).astype(param.dtype, copy=False)
        state.m[name] = m.astype(param.dtype, copy=False)
        state.v[name] = v.astype(param.dtype, copy=False)
    return state


class Adam:
    """Stateful wrapper binding a parameter store to its moment estimates."""

    def __init__(self, params: ParamStore, cfg: TrainConfig):
        self.params = params
        self.cfg = cfg
        self.state = AdamState.zeros_like(params)

    def step(self, grads: Mapping[str, np.ndarray]) -> None:
        adam_step(self.params, grads, self.state, self.cfg)
