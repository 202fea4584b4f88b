"""
Stratified k-fold planning with an 8:1:1 train/validation/test rotation.

Fold f tests on fold f, validates on fold (f + 1) mod k and trains on
the rest.
"""

from dataclasses import dataclass
from typing import Iterator, Sequence, Union

import numpy as np

from ..exceptions import ConfigurationError, RangeError
from .corpus import Corpus


@dataclass
class FoldSplit:
    fold: int
    train: np.ndarray
    validation: np.ndarray
    test: np.ndarray


@dataclass
class FoldPlan:
    """Fold id of every sample."""
    k: int
    seed: int
    assignments: np.ndarray

    def __len__(self) -> int:
        return self.k

    def indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def split(self, fold: int) -> FoldSplit:
        if not 0 <= fold < self.k:
            raise RangeError(f"fold {fold} outside [0, {self.k})")
        validation_fold = (fold + 1) % self.k
        train_mask = (self.assignments != fold) & (self.assignments != validation_fold)
        return FoldSplit(
            fold=fold,
            train=np.flatnonzero(train_mask),
            validation=self.indices(validation_fold),
            test=self.indices(fold),
        )

    def __iter__(self) -> Iterator[FoldSplit]:
        for fold in range(self.k):
            yield self.split(fold)


def make_folds(dataset: Union[Corpus, Sequence[int]], k: int = 10, seed: int = 0) -> FoldPlan:
    """
    Assign every sample to one of k folds, stratified by label.

    Members of each class are shuffled and dealt round-robin; the deal
    continues across classes, so fold sizes differ by at most one.

    Raises:
        ConfigurationError: k < 3, or a class with fewer than k members
    """
    labels = dataset.labels if isinstance(dataset, Corpus) else np.asarray(dataset, dtype=np.int64)
    if k < 3:
        raise ConfigurationError(f"need at least 3 folds for a train/validation/test rotation, got {k}")

    classes, counts = np.unique(labels, return_counts=True)
    small = [int(c) for c, n in zip(classes, counts) if n < k]
    if small:
        raise ConfigurationError(f"classes {small} have fewer than {k} samples")

    rng = np.random.default_rng(seed)
    assignments = np.empty(labels.size, dtype=np.int64)
    cursor = 0
    for c in classes:
        members = np.flatnonzero(labels == c)
        rng.shuffle(members)
        assignments[members] = (cursor + np.arange(members.size)) % k
        cursor = (cursor + members.size) % k
    return FoldPlan(k=k, seed=seed, assignments=assignments)
