"""
Synthetic two-modality corpus with controllable cross-modal conflict.

Each class owns one random audio template and one random text
template (with its own true length). A sample is its class templates
plus Gaussian noise; with probability ρ its text side is taken from a
uniformly chosen other class instead, and the sample is flagged as
conflicted. Audio always stays truthful.
"""

import logging
from typing import Tuple

import numpy as np

from ..models import SynthConfig
from .corpus import SPECTROGRAM_SHAPE, TEXT_SHAPE, Corpus

logger = logging.getLogger(__name__)


def generate(cfg: SynthConfig, audio_shape: Tuple[int, int] = SPECTROGRAM_SHAPE,
             text_shape: Tuple[int, int] = TEXT_SHAPE) -> Corpus:
    """
    Draw a corpus; the result is fully determined by ``cfg``.

    Args:
        cfg: Generator settings (classes, counts, ρ, σ, seed)
        audio_shape: Spectrogram shape (reduced only for tests)
        text_shape: Embedding sequence shape (reduced only for tests)

    Returns:
        Corpus ordered by class, ids ``synth_00000``, ``synth_00001``, ...
    """
    rng = np.random.default_rng(cfg.seed)
    classes = cfg.classes
    seq_len = text_shape[0]

    audio_templates = rng.standard_normal((classes,) + audio_shape).astype(np.float32)
    text_templates = rng.standard_normal((classes,) + text_shape).astype(np.float32)
    template_lengths = rng.integers(min(cfg.min_text_length, seq_len), seq_len + 1, size=classes)
    for c in range(classes):
        text_templates[c, template_lengths[c]:] = 0.0

    counts = cfg.counts()
    labels = np.repeat(np.arange(classes), counts)
    total = labels.size

    conflict = rng.random(total) < cfg.rho
    shift = rng.integers(1, classes, size=total)
    text_class = np.where(conflict, (labels + shift) % classes, labels)
    lengths = template_lengths[text_class]

    sigma = np.float32(cfg.sigma)
    audio = np.empty((total,) + audio_shape, dtype=np.float32)
    text = np.empty((total,) + text_shape, dtype=np.float32)
    for i in range(total):
        audio[i] = audio_templates[labels[i]] + sigma * rng.standard_normal(audio_shape, dtype=np.float32)
        noise = rng.standard_normal(text_shape, dtype=np.float32)
        noise[lengths[i]:] = 0.0
        text[i] = text_templates[text_class[i]] + sigma * noise

    ids = [f"synth_{i:05d}" for i in range(total)]
    logger.info(
        f"Generated {total} samples over {classes} classes "
        f"({int(conflict.sum())} conflicted, rho={cfg.rho}, sigma={cfg.sigma}, seed={cfg.seed})"
    )
    return Corpus(audio, text, lengths, labels, ids, classes, conflict_flags=conflict)
