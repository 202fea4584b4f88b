"""
Dense tensors and the reverse-mode differentiation tape.

A ``Tensor`` wraps a numpy array. Differentiable operations (see
``ops``) record themselves onto the tape that is active in the
current context; ``backward`` replays that tape in reverse to
produce gradients for every parameter in a ``ParamStore``.
"""

from __future__ import annotations

import contextvars
from collections import OrderedDict
from contextlib import contextmanager
from dataclasses import dataclass
from typing import TYPE_CHECKING, Callable, Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import ContractError

if TYPE_CHECKING:
    from .params import ParamStore

BackwardRule = Callable[[np.ndarray], Sequence[Optional[np.ndarray]]]

_ACTIVE_TAPE: contextvars.ContextVar[Optional["Tape"]] = contextvars.ContextVar(
    "active_tape", default=None
)


class Tensor:
    """N-dimensional array that can participate in a differentiation tape."""

    __slots__ = ("data", "requires_grad", "node_id", "name")

    def __init__(self, data, requires_grad: bool = False, name: Optional[str] = None,
                 dtype: Optional[np.dtype] = None):
        array = np.asarray(data, dtype=dtype)
        if array.dtype.kind != "f":
            array = array.astype(np.float64)
        self.data: np.ndarray = array
        self.requires_grad = requires_grad
        self.node_id: Optional[int] = None
        self.name = name

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    @property
    def dtype(self) -> np.dtype:
        return self.data.dtype

    @property
    def size(self) -> int:
        return int(self.data.size)

    def item(self) -> float:
        if self.data.size != 1:
            raise ContractError(f"item() needs a single-element tensor, got shape {self.shape}")
        return float(self.data.reshape(()))

    def __repr__(self) -> str:
        label = f" '{self.name}'" if self.name else ""
        return f"<Tensor{label} shape={self.shape} dtype={self.dtype} requires_grad={self.requires_grad}>"


@dataclass
class TapeRecord:
    """One recorded operation: its inputs, its output and its backward rule."""
    op: str
    inputs: Tuple[Tensor, ...]
    output: Tensor
    backward: BackwardRule


class Tape:
    """Ordered log of differentiable operations.

    Records are appended as operations execute, so every record's
    inputs were produced by an earlier record or are leaves.
    """

    def __init__(self):
        self.records: List[TapeRecord] = []
        self._tokens: List[contextvars.Token] = []

    def __enter__(self) -> "Tape":
        self._tokens.append(_ACTIVE_TAPE.set(self))
        return self

    def __exit__(self, exc_type, exc, tb) -> None:
        _ACTIVE_TAPE.reset(self._tokens.pop())

    def __len__(self) -> int:
        return len(self.records)

    def record(self, op: str, inputs: Tuple[Tensor, ...], output: Tensor,
               backward: BackwardRule) -> None:
        output.node_id = len(self.records)
        self.records.append(TapeRecord(op, inputs, output, backward))

    def ops(self) -> List[str]:
        return [r.op for r in self.records]


def active_tape() -> Optional[Tape]:
    """Return the tape recording in the current context, if any."""
    return _ACTIVE_TAPE.get()


@contextmanager
def no_tape() -> Iterator[None]:
    """Run the enclosed block in inference mode (nothing is recorded)."""
    token = _ACTIVE_TAPE.set(None)
    try:
        yield
    finally:
        _ACTIVE_TAPE.reset(token)


def record_op(op: str, inputs: Sequence[Tensor], output: np.ndarray,
              backward: BackwardRule) -> Tensor:
    """Wrap an op result and record it on the active tape when it needs gradients."""
    inputs = tuple(inputs)
    requires_grad = any(t.requires_grad for t in inputs)
    result = Tensor(output, requires_grad=requires_grad)
    tape = active_tape()
    if tape is not None and requires_grad:
        tape.record(op, inputs, result, backward)
    return result


def backward(loss: Tensor, tape: Tape, params: "ParamStore") -> "OrderedDict[str, np.ndarray]":
    """
    Back-propagate a scalar loss through the tape.

    Args:
        loss: Scalar tensor produced while ``tape`` was active
        tape: Tape holding the forward computation
        params: Parameters to report gradients for

    Returns:
        Gradient per parameter name, in the store's iteration order.
        Parameters the loss does not depend on get zeros.
    """
    if loss.size != 1:
        raise ContractError(f"backward needs a scalar loss, got shape {loss.shape}")

    grads: Dict[int, np.ndarray] = {id(loss): np.ones_like(loss.data)}

    for record in reversed(tape.records):
        upstream = grads.pop(id(record.output), None)
        if upstream is None:
            continue
        input_grads = record.backward(upstream)
        for tensor, grad in zip(record.inputs, input_grads):
            if grad is None or not tensor.requires_grad:
                continue
            key = id(tensor)
            if key in grads:
                grads[key] = grads[key] + grad
            else:
                grads[key] = grad

    result: "OrderedDict[str, np.ndarray]" = OrderedDict()
    for name, param in params.items():
        grad = grads.get(id(param))
        if grad is None:
            result[name] = np.zeros_like(param.data)
        else:
            result[name] = np.asarray(grad, dtype=param.dtype).reshape(param.shape)
    return result
