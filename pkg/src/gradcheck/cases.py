"""
Built-in gradient-check cases: every differentiable op, both encoders,
each loss, and the complete combined objective on a toy network.

Probe points keep ReLU inputs at least 0.1 away from zero and
max-pool windows free of near-ties, so central differences never
straddle a kink.
"""

import logging
from typing import Callable, Tuple

import numpy as np

from ..data.batching import make_batch
from ..data.synth import generate
from ..encoders import audio_encode, init_audio_params, init_text_params, lstm_step, text_encode
from ..fusion import (
    Discriminator, EmbeddingPair, cross_entropy_loss, info_nce_loss, init_discriminator_params,
)
from ..models import AudioEncoderConfig, ModelConfig, SynthConfig, TextEncoderConfig
from ..tensor import ParamStore, Tensor, ops
from ..training.model import FusionModel
from .case_registry import GradCheckCase, Program, case_registry

logger = logging.getLogger(__name__)

Builder = Callable[[np.random.Generator], Tuple[Program, ParamStore]]


def toy_model_config(num_classes: int = 2) -> ModelConfig:
    """A network small enough to probe every coordinate."""
    return ModelConfig(
        num_classes=num_classes,
        audio=AudioEncoderConfig(layers=2, channels=2, input_size=8),
        text=TextEncoderConfig(num_layers=2, input_size=5, hidden_size=3, seq_len=4, attention_size=3),
        discriminator_hidden=4,
    )


def _store(**arrays: np.ndarray) -> ParamStore:
    store = ParamStore()
    for name, value in arrays.items():
        store.add(name, np.asarray(value, dtype=np.float64))
    return store


def _away_from_zero(rng: np.random.Generator, shape, margin: float = 0.1) -> np.ndarray:
    u = rng.standard_normal(shape)
    return np.sign(u) * (margin + np.abs(u))


def _weighted_sum_loss(x: Tensor, weights: np.ndarray) -> Tensor:
    """Non-symmetric scalar readout so every output coordinate matters differently."""
    return ops.sum(ops.mul(x, Tensor(weights)))


class ProgramCase(GradCheckCase):
    """Case defined by a name and a builder function."""

    def __init__(self, name: str, builder: Builder):
        self._name = name
        self._builder = builder

    @property
    def case_name(self) -> str:
        return self._name

    def build(self, rng: np.random.Generator) -> Tuple[Program, ParamStore]:
        return self._builder(rng)


# ---------------------------------------------------------------------------
# tensor ops
# ---------------------------------------------------------------------------

def _matmul(rng):
    p = _store(a=rng.standard_normal((3, 4)), b=rng.standard_normal((4, 2)))
    w = rng.standard_normal((3, 2))
    return lambda: _weighted_sum_loss(ops.matmul(p["a"], ops.transpose(ops.transpose(p["b"]))), w), p


def _elementwise(rng):
    p = _store(x=rng.standard_normal((2, 3)) * 0.5, y=rng.standard_normal((2, 3)) * 0.5,
               bias=rng.standard_normal(3))
    w = rng.standard_normal((2, 3))

    def program():
        z = ops.mul(ops.sigmoid(p["x"]), ops.tanh(p["y"]))
        z = ops.sub(ops.add(z, p["bias"]), ops.scale(ops.exp(p["x"]), 0.3))
        return _weighted_sum_loss(z, w)

    return program, p


def _relu(rng):
    p = _store(x=_away_from_zero(rng, (3, 4)))
    w = rng.standard_normal((3, 4))
    return lambda: _weighted_sum_loss(ops.relu(p["x"]), w), p


def _concat_split(rng):
    p = _store(a=rng.standard_normal((2, 3)), b=rng.standard_normal((2, 2)))
    w = rng.standard_normal((2, 2))

    def program():
        joined = ops.concat(p["a"], p["b"])
        left, right = ops.split(joined, 2)
        return ops.add(_weighted_sum_loss(ops.slice_cols(right, 0, 2), w),
                       ops.mean(ops.tanh(left)))

    return program, p


def _logsumexp(rng):
    p = _store(v=rng.standard_normal(6), m=rng.standard_normal((3, 4)))
    w = rng.standard_normal(3)

    def program():
        rows = ops.logsumexp(p["m"], axis=1)
        return ops.add(ops.logsumexp(p["v"]), _weighted_sum_loss(rows, w))

    return program, p


def _segment_logsumexp(rng):
    p = _store(x=rng.standard_normal(7))
    w = rng.standard_normal(3)
    return lambda: _weighted_sum_loss(ops.segment_logsumexp(p["x"], [0, 2, 5, 7]), w), p


def _gather(rng):
    p = _store(a=rng.standard_normal((4, 3)))
    w = rng.standard_normal(5)

    def program():
        rows = ops.take_rows(p["a"], [3, 0, 3, 1, 2])
        return _weighted_sum_loss(ops.pick(rows, [0, 2, 1, 1, 0]), w)

    return program, p


def _attention_ops(rng):
    p = _store(energies=rng.standard_normal((2, 4)), seq=rng.standard_normal((2, 4, 3)))
    mask = np.array([[True, True, True, False], [True, False, True, True]])
    w = rng.standard_normal((2, 3))

    def program():
        weights = ops.masked_softmax(p["energies"], mask)
        return _weighted_sum_loss(ops.weighted_sum(weights, p["seq"]), w)

    return program, p


def _sequence_ops(rng):
    p = _store(x=rng.standard_normal((2, 3, 4)))
    w = rng.standard_normal((2, 3, 4))

    def program():
        steps = [ops.tanh(ops.select_step(p["x"], t)) for t in reversed(range(3))]
        stacked = ops.stack_steps(steps)
        flat = ops.reshape(stacked, (2, 12))
        return _weighted_sum_loss(ops.reshape(flat, (2, 3, 4)), w)

    return program, p


def _conv2d(rng):
    p = _store(x=rng.standard_normal((2, 2, 4, 4)), kernel=rng.standard_normal((3, 2, 3, 3)),
               bias=rng.standard_normal(3))
    w = rng.standard_normal((2, 3, 4, 4))
    return lambda: _weighted_sum_loss(ops.conv2d(p["x"], p["kernel"], p["bias"]), w), p


def _maxpool2d(rng):
    # distinct values 0.01 apart: no window is within 10·h of a tie
    values = rng.permutation(2 * 2 * 4 * 4).reshape(2, 2, 4, 4) * 0.01
    p = _store(x=values)
    w = rng.standard_normal((2, 2, 2, 2))
    return lambda: _weighted_sum_loss(ops.maxpool2d(p["x"]), w), p


# ---------------------------------------------------------------------------
# encoders and losses
# ---------------------------------------------------------------------------

def _lstm_step(rng):
    p = _store(x=rng.standard_normal((2, 5)), h=rng.standard_normal((2, 3)) * 0.5,
               c=rng.standard_normal((2, 3)) * 0.5, W_ih=rng.standard_normal((5, 12)) * 0.4,
               W_hh=rng.standard_normal((3, 12)) * 0.4, b=rng.standard_normal(12) * 0.1)
    w_h, w_c = rng.standard_normal((2, 3)), rng.standard_normal((2, 3))

    def program():
        h, c = lstm_step(p["x"], p["h"], p["c"], p["W_ih"], p["W_hh"], p["b"])
        return ops.add(_weighted_sum_loss(h, w_h), _weighted_sum_loss(c, w_c))

    return program, p


def _audio_encoder(rng):
    config = toy_model_config().audio
    p = ParamStore()
    init_audio_params(p, config, rng, dtype=np.float64)
    x = Tensor(rng.standard_normal((2, 1, config.input_size, config.input_size)))
    w = rng.standard_normal((2, config.embedding_dim))
    return lambda: _weighted_sum_loss(audio_encode(x, p, config), w), p


def _text_encoder(rng):
    config = toy_model_config().text
    p = ParamStore()
    init_text_params(p, config, rng, dtype=np.float64)
    x = Tensor(rng.standard_normal((3, config.seq_len, config.input_size)))
    lengths = [4, 2, 1]
    w = rng.standard_normal((3, config.hidden_size))
    return lambda: _weighted_sum_loss(text_encode(x, lengths, p, config), w), p


def _cross_entropy(rng):
    p = _store(s=rng.standard_normal((4, 3)))
    return lambda: cross_entropy_loss(p["s"], [0, 2, 1, 2]), p


def _info_nce(rng):
    p = ParamStore()
    p.add("e_a", rng.standard_normal((4, 3)))
    p.add("e_t", rng.standard_normal((4, 2)))
    init_discriminator_params(p, 5, 4, rng, dtype=np.float64)
    batch = make_batch(np.array([0, 0, 1, 2]), [0, 1, 2, 3])
    disc = Discriminator.from_params(p)

    def program():
        return info_nce_loss(EmbeddingPair(p["e_a"], p["e_t"]), batch.negatives, disc)

    return program, p


def _combined_objective(rng):
    config = toy_model_config()
    model = FusionModel.initialize(config, seed=int(rng.integers(2 ** 31)), dtype=np.float64)
    synth = SynthConfig(classes=config.num_classes, samples_per_class=1, rho=0.0, sigma=0.5,
                        seed=int(rng.integers(2 ** 31)), min_text_length=2)
    corpus = generate(synth, audio_shape=(config.audio.input_size,) * 2,
                      text_shape=(config.text.seq_len, config.text.input_size))
    batch = make_batch(corpus.labels, np.arange(len(corpus)))
    return lambda: model.batch_loss(corpus, batch, alpha=0.3).total, model.params


DEFAULT_CASES = [
    ("matmul", _matmul),
    ("elementwise", _elementwise),
    ("relu", _relu),
    ("concat_split", _concat_split),
    ("logsumexp", _logsumexp),
    ("segment_logsumexp", _segment_logsumexp),
    ("gather", _gather),
    ("attention_ops", _attention_ops),
    ("sequence_ops", _sequence_ops),
    ("conv2d", _conv2d),
    ("maxpool2d", _maxpool2d),
    ("lstm_step", _lstm_step),
    ("audio_encoder", _audio_encoder),
    ("text_encoder", _text_encoder),
    ("cross_entropy", _cross_entropy),
    ("info_nce", _info_nce),
    ("combined_objective", _combined_objective),
]


def initialize_cases() -> None:
    """Register the built-in cases in the global registry."""
    for name, builder in DEFAULT_CASES:
        case_registry.register(ProgramCase(name, builder))
    logger.debug(f"Gradient-check registry holds {len(case_registry.list_cases())} cases")
