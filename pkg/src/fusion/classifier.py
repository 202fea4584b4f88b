"""
Linear model-level fusion classifier.

Scores are s = W·[e_a; e_t] with W = [W1 | W2] and no bias, so the
fused score splits exactly into per-modality parts s = s_a + s_t with
s_a = W1·e_a and s_t = W2·e_t.
"""

from dataclasses import dataclass

import numpy as np

from ..exceptions import DimensionError
from ..tensor import ParamStore, Tensor, ops

WEIGHT_NAME = "fusion.W"


@dataclass
class EmbeddingPair:
    """Per-sample latent codes from the two encoders."""
    e_a: Tensor
    e_t: Tensor

    def __post_init__(self):
        if self.e_a.ndim != 2 or self.e_t.ndim != 2 or self.e_a.shape[0] != self.e_t.shape[0]:
            raise DimensionError("embedding batch sizes differ", self.e_a.shape, self.e_t.shape)

    @property
    def batch_size(self) -> int:
        return self.e_a.shape[0]


@dataclass
class ScoreVector:
    """Fused scores and their per-modality decomposition (each B×C)."""
    s: Tensor
    s_a: Tensor
    s_t: Tensor

    @property
    def num_classes(self) -> int:
        return self.s.shape[1]


@dataclass
class FusionClassifier:
    """Weight matrix W (C × (d_a + d_t)) and the column where W2 starts."""
    W: Tensor
    audio_dim: int

    @property
    def num_classes(self) -> int:
        return self.W.shape[0]

    @property
    def W1(self) -> Tensor:
        return ops.slice_cols(self.W, 0, self.audio_dim)

    @property
    def W2(self) -> Tensor:
        return ops.slice_cols(self.W, self.audio_dim, self.W.shape[1])

    @classmethod
    def from_params(cls, params: ParamStore, audio_dim: int) -> 'FusionClassifier':
        return cls(params[WEIGHT_NAME], audio_dim)


def init_classifier_params(store: ParamStore, num_classes: int, fused_dim: int,
                           rng: np.random.Generator, dtype=np.float32) -> None:
    bound = 1.0 / np.sqrt(fused_dim)
    store.add(WEIGHT_NAME, rng.uniform(-bound, bound, size=(num_classes, fused_dim)).astype(dtype))


def classify(pair: EmbeddingPair, clf: FusionClassifier) -> ScoreVector:
    """Fused scores s plus the per-modality scores s_a and s_t."""
    audio_dim = pair.e_a.shape[1]
    if audio_dim != clf.audio_dim or audio_dim + pair.e_t.shape[1] != clf.W.shape[1]:
        raise DimensionError("embeddings do not match classifier columns",
                             pair.e_a.shape, pair.e_t.shape, clf.W.shape)
    fused = ops.concat(pair.e_a, pair.e_t)
    s = ops.matmul(fused, ops.transpose(clf.W))
    s_a = ops.matmul(pair.e_a, ops.transpose(clf.W1))
    s_t = ops.matmul(pair.e_t, ops.transpose(clf.W2))
    return ScoreVector(s=s, s_a=s_a, s_t=s_t)
