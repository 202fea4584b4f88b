"""
Mini-batch construction with different-emotion negative sets.

For every anchor the negative set is all other in-batch samples with
a different label, so N ≤ batch size - 1. Anchors whose batch holds
no other label contribute to the classification loss only.
"""

import logging
from dataclasses import dataclass
from typing import Iterator, List, Sequence

import numpy as np

from ..exceptions import ConfigurationError
from .corpus import Corpus

logger = logging.getLogger(__name__)


@dataclass
class Batch:
    """Dataset indices of one mini-batch plus per-anchor negative positions."""
    indices: np.ndarray
    labels: np.ndarray
    negatives: List[np.ndarray]

    @property
    def size(self) -> int:
        return int(self.indices.size)

    @property
    def l2_anchors(self) -> np.ndarray:
        """Batch positions that have at least one negative."""
        return np.array([i for i, negs in enumerate(self.negatives) if negs.size], dtype=np.int64)


def negative_sets(labels: Sequence[int]) -> List[np.ndarray]:
    """For each position, the positions holding a different label."""
    labels = np.asarray(labels)
    is_negative = labels[:, None] != labels[None, :]
    return [np.flatnonzero(row) for row in is_negative]


def make_batch(labels: np.ndarray, indices: Sequence[int]) -> Batch:
    indices = np.asarray(indices, dtype=np.int64)
    batch_labels = labels[indices]
    return Batch(indices=indices, labels=batch_labels, negatives=negative_sets(batch_labels))


def _require_two_labels(labels: np.ndarray) -> None:
    if np.unique(labels).size < 2:
        raise ConfigurationError("training data must contain at least two distinct labels")


def sample_batch(dataset: Corpus, batch_size: int = 64,
                 rng: np.random.Generator = None) -> Batch:
    """Draw one batch uniformly without replacement."""
    _require_two_labels(dataset.labels)
    rng = rng if rng is not None else np.random.default_rng()
    size = min(batch_size, len(dataset))
    return make_batch(dataset.labels, rng.choice(len(dataset), size=size, replace=False))


class BatchSampler:
    """Shuffles once per epoch and walks the permutation in fixed-size batches."""

    def __init__(self, labels: Sequence[int], batch_size: int, rng: np.random.Generator):
        self.labels = np.asarray(labels, dtype=np.int64)
        if batch_size < 1:
            raise ConfigurationError("batch size must be positive")
        _require_two_labels(self.labels)
        self.batch_size = batch_size
        self.rng = rng

    def __len__(self) -> int:
        return -(-self.labels.size // self.batch_size)

    def epoch(self) -> Iterator[Batch]:
        order = self.rng.permutation(self.labels.size)
        for start in range(0, order.size, self.batch_size):
            yield make_batch(self.labels, order[start:start + self.batch_size])
