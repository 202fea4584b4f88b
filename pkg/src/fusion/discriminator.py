"""
Pair discriminator d(e_a, e_t): one ReLU hidden layer over [e_a; e_t], scalar output.
"""

from dataclasses import dataclass

import numpy as np

from ..exceptions import DimensionError
from ..tensor import ParamStore, Tensor, ops

PREFIX = "discriminator"


@dataclass
class Discriminator:
    W1: Tensor  # fused_dim × H
    b1: Tensor  # H
    W2: Tensor  # H × 1
    b2: Tensor  # 1

    @property
    def input_dim(self) -> int:
        return self.W1.shape[0]

    @classmethod
    def from_params(cls, params: ParamStore) -> 'Discriminator':
        return cls(params[f"{PREFIX}.W1"], params[f"{PREFIX}.b1"],
                   params[f"{PREFIX}.W2"], params[f"{PREFIX}.b2"])

    def score_pairs(self, e_a: Tensor, e_t: Tensor) -> Tensor:
        """Score row-aligned pairs; returns a vector with one value per row."""
        pairs = ops.concat(e_a, e_t)
        if pairs.shape[1] != self.input_dim:
            raise DimensionError("discriminator input width mismatch", pairs.shape, self.W1.shape)
        hidden = ops.relu(ops.add(ops.matmul(pairs, self.W1), self.b1))
        out = ops.add(ops.matmul(hidden, self.W2), self.b2)
        return ops.reshape(out, (pairs.shape[0],))


def init_discriminator_params(store: ParamStore, input_dim: int, hidden: int,
                              rng: np.random.Generator, dtype=np.float32) -> None:
    w1 = rng.uniform(-1.0, 1.0, size=(input_dim, hidden)) / np.sqrt(input_dim)
    w2 = rng.uniform(-1.0, 1.0, size=(hidden, 1)) / np.sqrt(hidden)
    store.add(f"{PREFIX}.W1", w1.astype(dtype))
    store.add(f"{PREFIX}.b1", np.zeros(hidden, dtype=dtype))
    store.add(f"{PREFIX}.W2", w2.astype(dtype))
    store.add(f"{PREFIX}.b2", np.zeros(1, dtype=dtype))


def discriminator_score(e_a: Tensor, e_t: Tensor, disc: Discriminator) -> Tensor:
    """Score a single (audio, text) embedding pair given as vectors."""
    if e_a.ndim != 1 or e_t.ndim != 1:
        raise DimensionError("discriminator_score takes two vectors", e_a.shape, e_t.shape)
    row_a = ops.reshape(e_a, (1, e_a.shape[0]))
    row_t = ops.reshape(e_t, (1, e_t.shape[0]))
    return ops.reshape(disc.score_pairs(row_a, row_t), ())
