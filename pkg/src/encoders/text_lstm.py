"""
Transcript encoder: stacked unidirectional LSTM with additive attention pooling.

Gate columns are laid out as [input | forget | candidate | output].
Attention scores are score_t = vᵀ tanh(M h_t), normalized over the
positions before each sample's true length.
"""

from typing import Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import DimensionError, InputError
from ..models import TextEncoderConfig
from ..tensor import ParamStore, Tensor, ops

PREFIX = "text_lstm"
ATTENTION_PREFIX = "attention"


def init_text_params(store: ParamStore, config: TextEncoderConfig,
                     rng: np.random.Generator, dtype=np.float32) -> None:
    hidden = config.hidden_size
    for layer in range(config.num_layers):
        fan_in = config.input_size if layer == 0 else hidden
        w_ih = rng.uniform(-1.0, 1.0, size=(fan_in, 4 * hidden)) / np.sqrt(fan_in)
        w_hh = rng.uniform(-1.0, 1.0, size=(hidden, 4 * hidden)) / np.sqrt(hidden)
        bias = np.zeros(4 * hidden)
        bias[hidden:2 * hidden] = config.forget_bias
        store.add(f"{PREFIX}.layer{layer}.W_ih", w_ih.astype(dtype))
        store.add(f"{PREFIX}.layer{layer}.W_hh", w_hh.astype(dtype))
        store.add(f"{PREFIX}.layer{layer}.b", bias.astype(dtype))

    attn = config.attention_size
    m = rng.uniform(-1.0, 1.0, size=(hidden, attn)) / np.sqrt(hidden)
    v = rng.uniform(-1.0, 1.0, size=(attn, 1)) / np.sqrt(attn)
    store.add(f"{ATTENTION_PREFIX}.M", m.astype(dtype))
    store.add(f"{ATTENTION_PREFIX}.v", v.astype(dtype))


def lstm_step(x_row: Tensor, h: Tensor, c: Tensor, w_ih: Tensor, w_hh: Tensor,
              b: Tensor) -> Tuple[Tensor, Tensor]:
    """
    One LSTM cell update.

    Args:
        x_row: B×in input at this step
        h: B×H previous hidden state
        c: B×H previous cell state
        w_ih: in×4H input weights
        w_hh: H×4H recurrent weights
        b: 4H gate bias

    Returns:
        (h', c') with c' = f⊙c + i⊙g and h' = o⊙tanh(c')
    """
    hidden = h.shape[1]
    if (w_ih.shape != (x_row.shape[1], 4 * hidden) or w_hh.shape != (hidden, 4 * hidden)
            or b.shape != (4 * hidden,) or c.shape != h.shape):
        raise DimensionError("LSTM gate parameters do not match state sizes",
                             x_row.shape, h.shape, w_ih.shape, w_hh.shape, b.shape)

    gates = ops.add(ops.add(ops.matmul(x_row, w_ih), ops.matmul(h, w_hh)), b)
    i = ops.sigmoid(ops.slice_cols(gates, 0, hidden))
    f = ops.sigmoid(ops.slice_cols(gates, hidden, 2 * hidden))
    g = ops.tanh(ops.slice_cols(gates, 2 * hidden, 3 * hidden))
    o = ops.sigmoid(ops.slice_cols(gates, 3 * hidden, 4 * hidden))

    c_next = ops.add(ops.mul(f, c), ops.mul(i, g))
    h_next = ops.mul(o, ops.tanh(c_next))
    return h_next, c_next


def text_encode(x_t: Tensor, true_lengths: Sequence[int], params: ParamStore,
                config: Optional[TextEncoderConfig] = None,
                return_attention: bool = False) -> Union[Tensor, Tuple[Tensor, np.ndarray]]:
    """
    Encode a batch of padded word-vector sequences.

    The recurrence runs only up to the longest true length in the
    batch; positions past a sample's own length are excluded from
    attention, so padded rows never reach the output.

    Args:
        x_t: B×T×D padded sequences
        true_lengths: Per-sample lengths in [1, T]
        params: Store holding the LSTM and attention parameters
        config: Encoder shape; defaults to 2×200 over 30×300
        return_attention: Also return the B×T' attention weights

    Returns:
        B×H embedding (and the attention weights when requested)
    """
    config = config or TextEncoderConfig()
    if x_t.ndim != 3 or x_t.shape[1:] != (config.seq_len, config.input_size):
        raise DimensionError("text encoder expects B×T×D input", x_t.shape,
                             (config.seq_len, config.input_size))
    lengths = np.asarray(true_lengths, dtype=np.int64)
    batch = x_t.shape[0]
    if lengths.shape != (batch,):
        raise DimensionError("one true length per sample required", lengths.shape, (batch,))
    if lengths.min() < 1:
        raise InputError("text true_length must be at least 1")
    if lengths.max() > config.seq_len:
        raise InputError(f"text true_length exceeds sequence length {config.seq_len}")

    steps = int(lengths.max())
    hidden = config.hidden_size
    layer_inputs = [ops.select_step(x_t, t) for t in range(steps)]

    for layer in range(config.num_layers):
        w_ih = params[f"{PREFIX}.layer{layer}.W_ih"]
        w_hh = params[f"{PREFIX}.layer{layer}.W_hh"]
        b = params[f"{PREFIX}.layer{layer}.b"]
        h = Tensor(np.zeros((batch, hidden), dtype=w_ih.dtype))
        c = Tensor(np.zeros((batch, hidden), dtype=w_ih.dtype))
        outputs = []
        for x_row in layer_inputs:
            h, c = lstm_step(x_row, h, c, w_ih, w_hh, b)
            outputs.append(h)
        layer_inputs = outputs

    states = ops.stack_steps(layer_inputs)
    flat = ops.reshape(states, (batch * steps, hidden))
    energies = ops.matmul(ops.tanh(ops.matmul(flat, params[f"{ATTENTION_PREFIX}.M"])),
                          params[f"{ATTENTION_PREFIX}.v"])
    energies = ops.reshape(energies, (batch, steps))
    mask = np.arange(steps)[None, :] < lengths[:, None]
    weights = ops.masked_softmax(energies, mask)
    pooled = ops.weighted_sum(weights, states)

    if return_attention:
        return pooled, weights.data
    return pooled
