"""
Differentiable tensor operations.

Each operation computes its forward value with numpy and registers a
backward rule returning one gradient per input (``None`` where the
input needs none). Shapes are checked strictly: apart from the
row-wise bias rule in ``add``/``sub`` there is no broadcasting.
"""

from typing import List, Optional, Sequence, Tuple, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import expit

from ..exceptions import ContractError, DimensionError
from .tensor import Tensor, record_op

Operand = Union[Tensor, float, int, np.ndarray]


def as_tensor(value: Operand) -> Tensor:
    """Wrap constants so they can flow through the ops."""
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _row_broadcast(a: Tensor, b: Tensor, op: str) -> int:
    """Return 0 for identical shapes, 1 if b is a row bias for a, 2 if a is one for b."""
    if a.shape == b.shape:
        return 0
    if a.ndim == 2 and b.ndim == 1 and a.shape[1] == b.shape[0]:
        return 1
    if b.ndim == 2 and a.ndim == 1 and b.shape[1] == a.shape[0]:
        return 2
    raise DimensionError(f"{op} shape mismatch", a.shape, b.shape)


# ---------------------------------------------------------------------------
# linear algebra
# ---------------------------------------------------------------------------

def matmul(a: Tensor, b: Tensor) -> Tensor:
    """Matrix product of an m×k and a k×n tensor."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise DimensionError("matmul inner dimensions disagree", a.shape, b.shape)
    a_data, b_data = a.data, b.data

    def _backward(g):
        return g @ b_data.T, a_data.T @ g

    return record_op("matmul", (a, b), a_data @ b_data, _backward)


def transpose(a: Tensor) -> Tensor:
    a = as_tensor(a)
    if a.ndim != 2:
        raise DimensionError("transpose needs a matrix", a.shape)
    return record_op("transpose", (a,), a.data.T, lambda g: (g.T,))


# ---------------------------------------------------------------------------
# elementwise
# ---------------------------------------------------------------------------

def add(a: Operand, b: Operand) -> Tensor:
    """Elementwise sum; a length-n vector may be added to every row of a B×n matrix."""
    a, b = as_tensor(a), as_tensor(b)
    mode = _row_broadcast(a, b, "add")

    def _backward(g):
        if mode == 1:
            return g, g.sum(axis=0)
        if mode == 2:
            return g.sum(axis=0), g
        return g, g

    return record_op("add", (a, b), a.data + b.data, _backward)


def sub(a: Operand, b: Operand) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    mode = _row_broadcast(a, b, "sub")

    def _backward(g):
        if mode == 1:
            return g, -g.sum(axis=0)
        if mode == 2:
            return g.sum(axis=0), -g
        return g, -g

    return record_op("sub", (a, b), a.data - b.data, _backward)


def mul(a: Operand, b: Operand) -> Tensor:
    """Elementwise (Hadamard) product of identically shaped tensors."""
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise DimensionError("mul shape mismatch", a.shape, b.shape)
    a_data, b_data = a.data, b.data
    return record_op("mul", (a, b), a_data * b_data, lambda g: (g * b_data, g * a_data))


def scale(a: Tensor, factor: float) -> Tensor:
    a = as_tensor(a)
    factor = float(factor)
    return record_op("scale", (a,), a.data * a.data.dtype.type(factor),
                     lambda g: (g * g.dtype.type(factor),))


def relu(a: Tensor) -> Tensor:
    a = as_tensor(a)
    mask = a.data > 0
    return record_op("relu", (a,), np.where(mask, a.data, 0).astype(a.dtype, copy=False),
                     lambda g: (g * mask,))


def sigmoid(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out = expit(a.data)
    return record_op("sigmoid", (a,), out, lambda g: (g * out * (1 - out),))


def tanh(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out = np.tanh(a.data)
    return record_op("tanh", (a,), out, lambda g: (g * (1 - out * out),))


def exp(a: Tensor) -> Tensor:
    a = as_tensor(a)
    out = np.exp(a.data)
    return record_op("exp", (a,), out, lambda g: (g * out,))


def elementwise(op: str, *operands: Operand, factor: Optional[float] = None) -> Tensor:
    """Dispatch one of the named elementwise operations."""
    unary = {"relu": relu, "sigmoid": sigmoid, "tanh": tanh, "exp": exp}
    binary = {"add": add, "sub": sub, "mul": mul}
    if op in unary:
        return unary[op](*operands)
    if op in binary:
        return binary[op](*operands)
    if op == "scale":
        if factor is None:
            raise ContractError("scale needs a factor")
        return scale(operands[0], factor)
    raise ContractError(f"Unknown elementwise op: {op}")


# ---------------------------------------------------------------------------
# reductions and reshaping
# ---------------------------------------------------------------------------

def sum(a: Tensor) -> Tensor:  # noqa: A001
    a = as_tensor(a)
    shape = a.shape
    return record_op("sum", (a,), np.asarray(a.data.sum()),
                     lambda g: (np.broadcast_to(g, shape).copy(),))


def mean(a: Tensor) -> Tensor:
    a = as_tensor(a)
    if a.size == 0:
        raise DimensionError("mean of an empty tensor", a.shape)
    shape, count = a.shape, a.size
    return record_op("mean", (a,), np.asarray(a.data.mean()),
                     lambda g: (np.broadcast_to(g / count, shape).copy(),))


def reshape(a: Tensor, shape: Sequence[int]) -> Tensor:
    a = as_tensor(a)
    original = a.shape
    try:
        out = a.data.reshape(tuple(shape))
    except ValueError as e:
        raise DimensionError(f"cannot reshape to {tuple(shape)}", original) from e
    return record_op("reshape", (a,), out, lambda g: (g.reshape(original),))


def flatten(a: Tensor) -> Tensor:
    """Collapse all but the leading (batch) axis."""
    return reshape(a, (a.shape[0], -1))


def concat(a: Tensor, b: Tensor) -> Tensor:
    """Join B×p and B×q tensors column-wise into B×(p+q)."""
    a, b = as_tensor(a), as_tensor(b)
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise DimensionError("concat batch mismatch", a.shape, b.shape)
    p = a.shape[1]
    return record_op("concat", (a, b), np.concatenate([a.data, b.data], axis=1),
                     lambda g: (g[:, :p], g[:, p:]))


def slice_cols(a: Tensor, start: int, stop: int) -> Tensor:
    a = as_tensor(a)
    if a.ndim != 2 or not 0 <= start < stop <= a.shape[1]:
        raise DimensionError(f"invalid column slice [{start}:{stop}]", a.shape)
    shape = a.shape

    def _backward(g):
        full = np.zeros(shape, dtype=g.dtype)
        full[:, start:stop] = g
        return (full,)

    return record_op("slice_cols", (a,), a.data[:, start:stop], _backward)


def split(a: Tensor, p: int) -> Tuple[Tensor, Tensor]:
    """Inverse of ``concat``: split columns at index p."""
    a = as_tensor(a)
    return slice_cols(a, 0, p), slice_cols(a, p, a.shape[1])


def take_rows(a: Tensor, index: Sequence[int]) -> Tensor:
    """Gather rows of a matrix (rows may repeat)."""
    a = as_tensor(a)
    index = np.asarray(index, dtype=np.int64)
    if a.ndim != 2:
        raise DimensionError("take_rows needs a matrix", a.shape)
    if index.size and (index.min() < 0 or index.max() >= a.shape[0]):
        raise DimensionError("take_rows index out of range", a.shape)
    shape = a.shape

    def _backward(g):
        full = np.zeros(shape, dtype=g.dtype)
        np.add.at(full, index, g)
        return (full,)

    return record_op("take_rows", (a,), a.data[index], _backward)


def pick(a: Tensor, index: Sequence[int]) -> Tensor:
    """Select a[i, index[i]] for every row i."""
    a = as_tensor(a)
    index = np.asarray(index, dtype=np.int64)
    if a.ndim != 2 or index.shape != (a.shape[0],):
        raise DimensionError("pick index does not match rows", a.shape, index.shape)
    rows = np.arange(a.shape[0])
    shape = a.shape

    def _backward(g):
        full = np.zeros(shape, dtype=g.dtype)
        full[rows, index] = g
        return (full,)

    return record_op("pick", (a,), a.data[rows, index], _backward)


def select_step(a: Tensor, t: int) -> Tensor:
    """Take time step t of a B×T×F sequence."""
    a = as_tensor(a)
    if a.ndim != 3 or not 0 <= t < a.shape[1]:
        raise DimensionError(f"invalid step {t}", a.shape)
    shape = a.shape

    def _backward(g):
        full = np.zeros(shape, dtype=g.dtype)
        full[:, t, :] = g
        return (full,)

    return record_op("select_step", (a,), a.data[:, t, :], _backward)


def stack_steps(steps: Sequence[Tensor]) -> Tensor:
    """Stack T tensors of shape B×H into a B×T×H sequence."""
    steps = [as_tensor(s) for s in steps]
    if not steps:
        raise DimensionError("stack_steps needs at least one step")
    first = steps[0].shape
    for s in steps:
        if s.shape != first or s.ndim != 2:
            raise DimensionError("stack_steps shape mismatch", first, s.shape)
    count = len(steps)
    return record_op("stack_steps", steps, np.stack([s.data for s in steps], axis=1),
                     lambda g: tuple(g[:, t, :] for t in range(count)))


# ---------------------------------------------------------------------------
# stable log-sum-exp family
# ---------------------------------------------------------------------------

def logsumexp(x: Tensor, axis: Optional[int] = None) -> Tensor:
    """
    Max-shifted log-sum-exp.

    With ``axis=None`` the input must be a non-empty vector and the
    result is a scalar; with ``axis=1`` a B×n matrix reduces to B values.
    """
    x = as_tensor(x)
    if axis is None:
        if x.ndim != 1 or x.shape[0] < 1:
            raise DimensionError("logsumexp needs a non-empty vector", x.shape)
        m = x.data.max()
        shifted = np.exp(x.data - m)
        total = shifted.sum()
        out = np.asarray(m + np.log(total))
        weights = shifted / total
        return record_op("logsumexp", (x,), out, lambda g: (g * weights,))
    if axis != 1 or x.ndim != 2 or x.shape[1] < 1:
        raise DimensionError("row-wise logsumexp needs a non-empty matrix", x.shape)
    m = x.data.max(axis=1, keepdims=True)
    shifted = np.exp(x.data - m)
    total = shifted.sum(axis=1, keepdims=True)
    out = (m + np.log(total))[:, 0]
    weights = shifted / total
    return record_op("logsumexp_rows", (x,), out, lambda g: (g[:, None] * weights,))


def segment_logsumexp(x: Tensor, offsets: Sequence[int]) -> Tensor:
    """
    Log-sum-exp over consecutive segments of a vector.

    Args:
        x: Vector of scores
        offsets: G+1 increasing boundaries; segment k is x[offsets[k]:offsets[k+1]]

    Returns:
        Vector of G values
    """
    x = as_tensor(x)
    offsets = np.asarray(offsets, dtype=np.int64)
    if x.ndim != 1 or offsets.ndim != 1 or offsets.size < 2:
        raise DimensionError("segment_logsumexp needs a vector and boundaries", x.shape)
    if offsets[0] != 0 or offsets[-1] != x.shape[0] or np.any(np.diff(offsets) <= 0):
        raise DimensionError("segment boundaries must be increasing and cover the input", x.shape)
    starts = offsets[:-1]
    lengths = np.diff(offsets)
    segment_of = np.repeat(np.arange(starts.size), lengths)
    m = np.maximum.reduceat(x.data, starts)
    shifted = np.exp(x.data - m[segment_of])
    total = np.add.reduceat(shifted, starts)
    out = m + np.log(total)
    weights = shifted / total[segment_of]
    return record_op("segment_logsumexp", (x,), out,
                     lambda g: (g[segment_of] * weights,))


def masked_softmax(x: Tensor, mask: np.ndarray) -> Tensor:
    """Row-wise softmax over the positions where ``mask`` is true; others get exactly 0."""
    x = as_tensor(x)
    mask = np.asarray(mask, dtype=bool)
    if x.ndim != 2 or mask.shape != x.shape:
        raise DimensionError("masked_softmax mask mismatch", x.shape, mask.shape)
    if not mask.any(axis=1).all():
        raise ContractError("masked_softmax needs at least one open position per row")
    masked = np.where(mask, x.data, -np.inf)
    m = masked.max(axis=1, keepdims=True)
    e = np.where(mask, np.exp(masked - m), 0).astype(x.dtype, copy=False)
    out = e / e.sum(axis=1, keepdims=True)

    def _backward(g):
        return (out * (g - (g * out).sum(axis=1, keepdims=True)),)

    return record_op("masked_softmax", (x,), out, _backward)


def weighted_sum(weights: Tensor, seq: Tensor) -> Tensor:
    """Contract B×T weights with a B×T×H sequence into B×H."""
    weights, seq = as_tensor(weights), as_tensor(seq)
    if weights.ndim != 2 or seq.ndim != 3 or weights.shape != seq.shape[:2]:
        raise DimensionError("weighted_sum shape mismatch", weights.shape, seq.shape)
    w, s = weights.data, seq.data

    def _backward(g):
        return np.einsum("bh,bth->bt", g, s), w[:, :, None] * g[:, None, :]

    return record_op("weighted_sum", (weights, seq), np.einsum("bt,bth->bh", w, s), _backward)


# ---------------------------------------------------------------------------
# convolution and pooling
# ---------------------------------------------------------------------------

def conv2d(x: Tensor, kernel: Tensor, bias: Optional[Tensor] = None, padding: int = 1) -> Tensor:
    """
    3×3 cross-correlation with unit zero padding (output keeps H×W).

    Args:
        x: Input of shape B×Cin×H×W
        kernel: Weights of shape Cout×Cin×3×3
        bias: Optional per-output-channel bias of shape Cout
        padding: Must be 1

    Returns:
        Tensor of shape B×Cout×H×W
    """
    x, kernel = as_tensor(x), as_tensor(kernel)
    if x.ndim != 4 or kernel.ndim != 4 or kernel.shape[2:] != (3, 3):
        raise DimensionError("conv2d expects B×C×H×W input and O×C×3×3 kernel", x.shape, kernel.shape)
    if padding != 1:
        raise DimensionError(f"conv2d supports padding=1 only, got {padding}")
    batch, channels, height, width = x.shape
    out_channels = kernel.shape[0]
    if kernel.shape[1] != channels:
        raise DimensionError("conv2d channel mismatch", x.shape, kernel.shape)
    if bias is not None:
        bias = as_tensor(bias)
        if bias.shape != (out_channels,):
            raise DimensionError("conv2d bias mismatch", bias.shape, (out_channels,))

    padded = np.pad(x.data, ((0, 0), (0, 0), (1, 1), (1, 1)))
    windows = sliding_window_view(padded, (3, 3), axis=(2, 3))
    cols = windows.transpose(0, 2, 3, 1, 4, 5).reshape(batch * height * width, channels * 9)
    flat_kernel = kernel.data.reshape(out_channels, channels * 9)
    out = (cols @ flat_kernel.T).reshape(batch, height, width, out_channels).transpose(0, 3, 1, 2)
    if bias is not None:
        out = out + bias.data[None, :, None, None]
    out = np.ascontiguousarray(out)

    def _backward(g):
        g_cols = g.transpose(0, 2, 3, 1).reshape(batch * height * width, out_channels)
        g_kernel = (g_cols.T @ cols).reshape(kernel.shape)
        d_cols = (g_cols @ flat_kernel).reshape(batch, height, width, channels, 3, 3)
        g_padded = np.zeros_like(padded)
        for i in range(3):
            for j in range(3):
                g_padded[:, :, i:i + height, j:j + width] += d_cols[..., i, j].transpose(0, 3, 1, 2)
        g_x = g_padded[:, :, 1:-1, 1:-1]
        if bias is None:
            return g_x, g_kernel
        return g_x, g_kernel, g.sum(axis=(0, 2, 3))

    inputs: List[Tensor] = [x, kernel] if bias is None else [x, kernel, bias]
    return record_op("conv2d", inputs, out, _backward)


def maxpool2d(x: Tensor) -> Tensor:
    """
    2×2 max pooling with stride 2.

    The gradient flows to the first maximal element of each window in
    row-major scan order.
    """
    x = as_tensor(x)
    if x.ndim != 4:
        raise DimensionError("maxpool2d expects B×C×H×W input", x.shape)
    batch, channels, height, width = x.shape
    if height % 2 or width % 2:
        raise DimensionError("maxpool2d needs even spatial dimensions", x.shape)
    oh, ow = height // 2, width // 2
    windows = (x.data.reshape(batch, channels, oh, 2, ow, 2)
               .transpose(0, 1, 2, 4, 3, 5)
               .reshape(batch, channels, oh, ow, 4))
    argmax = windows.argmax(axis=-1)[..., None]
    out = np.take_along_axis(windows, argmax, axis=-1)[..., 0]

    def _backward(g):
        routed = np.zeros(windows.shape, dtype=g.dtype)
        np.put_along_axis(routed, argmax, g[..., None], axis=-1)
        return (routed.reshape(batch, channels, oh, ow, 2, 2)
                .transpose(0, 1, 2, 4, 3, 5)
                .reshape(batch, channels, height, width),)

    return record_op("maxpool2d", (x,), out, _backward)
