"""
The complete fusion network: both encoders, the linear classifier and
(optionally) the pair discriminator, sharing one ParamStore.

Each component draws its initial weights from its own generator
seeded with (seed, component), so adding or removing the
discriminator leaves every other initial weight unchanged.
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from ..data.batching import Batch
from ..data.corpus import Corpus
from ..encoders import audio_encode, init_audio_params, init_text_params, text_encode
from ..exceptions import InputError
from ..fusion import (
    Discriminator, EmbeddingPair, FusionClassifier, ScoreVector, classify, combined_loss,
    cross_entropy_loss, info_nce_loss, init_classifier_params, init_discriminator_params,
)
from ..models import ModelConfig
from ..tensor import ParamStore, Tensor, no_tape

logger = logging.getLogger(__name__)

_AUDIO, _TEXT, _CLASSIFIER, _DISCRIMINATOR = range(4)


@dataclass
class LossTerms:
    """Scalar tensors of one batch; ``l2`` is None when no anchor had negatives."""
    total: Tensor
    l1: Tensor
    l2: Optional[Tensor]

    def values(self) -> Tuple[float, float, float]:
        l2 = self.l2.item() if self.l2 is not None else float("nan")
        return self.total.item(), self.l1.item(), l2


@dataclass
class ScoreArrays:
    """Inference-mode scores for a whole corpus (each N×C)."""
    s: np.ndarray
    s_a: np.ndarray
    s_t: np.ndarray


class FusionModel:
    """Parameters plus forward computation of the fusion network."""

    def __init__(self, config: ModelConfig, params: ParamStore, use_discriminator: bool = True):
        self.config = config
        self.params = params
        self.use_discriminator = use_discriminator

    @classmethod
    def initialize(cls, config: ModelConfig, seed: int = 0, use_discriminator: bool = True,
                   dtype=np.float32) -> 'FusionModel':
        params = ParamStore()
        init_audio_params(params, config.audio, np.random.default_rng([seed, _AUDIO]), dtype)
        init_text_params(params, config.text, np.random.default_rng([seed, _TEXT]), dtype)
        init_classifier_params(params, config.num_classes, config.fused_dim,
                               np.random.default_rng([seed, _CLASSIFIER]), dtype)
        if use_discriminator:
            init_discriminator_params(params, config.fused_dim, config.discriminator_hidden,
                                      np.random.default_rng([seed, _DISCRIMINATOR]), dtype)
        logger.debug(f"Initialized model with {params.num_parameters} parameters "
                     f"(discriminator={'on' if use_discriminator else 'off'})")
        return cls(config, params, use_discriminator)

    @property
    def dtype(self) -> np.dtype:
        return self.params["fusion.W"].dtype

    @property
    def classifier(self) -> FusionClassifier:
        return FusionClassifier.from_params(self.params, self.config.audio.embedding_dim)

    @property
    def discriminator(self) -> Optional[Discriminator]:
        return Discriminator.from_params(self.params) if self.use_discriminator else None

    def encode(self, audio: np.ndarray, text: np.ndarray, lengths: np.ndarray) -> EmbeddingPair:
        """Embed raw feature arrays (B×S×S spectrograms, B×T×D sequences)."""
        x_a = Tensor(np.asarray(audio, dtype=self.dtype)[:, None, :, :])
        x_t = Tensor(np.asarray(text, dtype=self.dtype))
        e_a = audio_encode(x_a, self.params, self.config.audio)
        e_t = text_encode(x_t, lengths, self.params, self.config.text)
        return EmbeddingPair(e_a, e_t)

    def forward(self, audio: np.ndarray, text: np.ndarray,
                lengths: np.ndarray) -> Tuple[EmbeddingPair, ScoreVector]:
        pair = self.encode(audio, text, lengths)
        return pair, classify(pair, self.classifier)

    def batch_loss(self, corpus: Corpus, batch: Batch, alpha: float) -> LossTerms:
        """
        Combined objective for one batch.

        Anchors without negatives drop out of L2; if none remain the
        regularizer term is absent for this batch.
        """
        idx = batch.indices
        pair, scores = self.forward(corpus.audio[idx], corpus.text[idx], corpus.lengths[idx])
        l1 = cross_entropy_loss(scores, batch.labels)

        l2 = None
        anchors = batch.l2_anchors
        if self.use_discriminator and anchors.size:
            l2 = info_nce_loss(pair, batch.negatives, self.discriminator, anchor_index=anchors)
        return LossTerms(total=combined_loss(l1, l2, alpha), l1=l1, l2=l2)

    def predict_scores(self, corpus: Corpus, batch_size: int = 128) -> ScoreArrays:
        """Fused and per-modality scores for every sample, without recording a tape."""
        if len(corpus) == 0:
            raise InputError("cannot score an empty sample set")
        s, s_a, s_t = [], [], []
        with no_tape():
            for start in range(0, len(corpus), batch_size):
                stop = start + batch_size
                _, scores = self.forward(corpus.audio[start:stop], corpus.text[start:stop],
                                         corpus.lengths[start:stop])
                s.append(scores.s.data)
                s_a.append(scores.s_a.data)
                s_t.append(scores.s_t.data)
        return ScoreArrays(np.concatenate(s), np.concatenate(s_a), np.concatenate(s_t))
