"""
Finite-difference verification of tape gradients.

Central differences are taken coordinate by coordinate on the live
parameter arrays; every probe restores the original value before the
next one.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional

import numpy as np

from ..exceptions import ProbeError
from .params import ParamStore
from .tensor import Tape, Tensor, backward, no_tape

logger = logging.getLogger(__name__)


@dataclass
class ParameterCheck:
    """Worst-case agreement for one parameter."""
    name: str
    max_rel_error: float
    coords_probed: int


@dataclass
class GradCheckReport:
    """Per-parameter maximum relative errors for one program."""
    tolerance: float
    parameters: List[ParameterCheck] = field(default_factory=list)

    @property
    def max_rel_error(self) -> float:
        return max((p.max_rel_error for p in self.parameters), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_rel_error < self.tolerance


def relative_error(analytic: np.ndarray, numeric: np.ndarray) -> np.ndarray:
    """|a - n| / max(1, |a|, |n|), elementwise."""
    denom = np.maximum(1.0, np.maximum(np.abs(analytic), np.abs(numeric)))
    return np.abs(analytic - numeric) / denom


def grad_check(f: Callable[[], Tensor], params: ParamStore, h: float = 1e-5,
               tol: float = 1e-4, max_coords: Optional[int] = None,
               seed: int = 0) -> GradCheckReport:
    """
    Compare tape gradients of ``f`` against central finite differences.

    Args:
        f: Zero-argument program building a scalar loss from ``params``
        params: Parameters to probe (double precision expected)
        h: Finite-difference step
        tol: Pass threshold on the maximum relative error
        max_coords: Probe at most this many coordinates per parameter
            (chosen deterministically from ``seed``); None probes all
        seed: Seed for coordinate sampling

    Returns:
        GradCheckReport with one entry per parameter
    """
    with Tape() as tape:
        loss = f()
    analytic = backward(loss, tape, params)

    rng = np.random.default_rng(seed)
    report = GradCheckReport(tolerance=tol)

    for name, param in params.items():
        flat = param.data.reshape(-1)
        grad = analytic[name].reshape(-1)
        coords = np.arange(flat.size)
        if max_coords is not None and flat.size > max_coords:
            coords = np.sort(rng.choice(flat.size, size=max_coords, replace=False))

        worst = 0.0
        for index in coords:
            original = flat[index]
            flat[index] = original + h
            plus = _probe(f, name, int(index))
            flat[index] = original - h
            minus = _probe(f, name, int(index))
            flat[index] = original
            numeric = (plus - minus) / (2.0 * h)
            worst = max(worst, float(relative_error(np.asarray(grad[index]), np.asarray(numeric))))

        report.parameters.append(ParameterCheck(name, worst, int(coords.size)))
        logger.debug(f"gradcheck {name}: max rel error {worst:.3e} over {coords.size} coords")

    return report


def _probe(f: Callable[[], Tensor], name: str, index: int) -> float:
    with no_tape():
        value = f().item()
    if not np.isfinite(value):
        raise ProbeError(name, index)
    return value
