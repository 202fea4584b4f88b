"""
Labeled corpora, the synthetic generator, batching and fold planning.
"""

from .corpus import (
    SPECTROGRAM_SHAPE, TEXT_SHAPE, Corpus, LabeledSample, Spectrogram, WordEmbeddingSequence,
    format_sample_id, parse_sample_id,
)
from .synth import generate
from .batching import Batch, BatchSampler, make_batch, negative_sets, sample_batch
from .folds import FoldPlan, FoldSplit, make_folds

__all__ = [
    'SPECTROGRAM_SHAPE', 'TEXT_SHAPE', 'Corpus', 'LabeledSample', 'Spectrogram',
    'WordEmbeddingSequence', 'format_sample_id', 'parse_sample_id', 'generate',
    'Batch', 'BatchSampler', 'make_batch', 'negative_sets', 'sample_batch',
    'FoldPlan', 'FoldSplit', 'make_folds',
]
