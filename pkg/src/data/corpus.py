"""
Data containers for labeled two-modality samples.

This module provides the per-sample feature types (spectrogram,
word-embedding sequence, labeled sample) and ``Corpus``, a column
store that keeps every modality as one contiguous array so batches
can be sliced without copying sample objects around.
"""

import re
from dataclasses import dataclass
from typing import Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import DimensionError, InputError, RangeError

SPECTROGRAM_SHAPE: Tuple[int, int] = (128, 128)
TEXT_SHAPE: Tuple[int, int] = (30, 300)

_SEGMENT_SUFFIX = re.compile(r"^(.*)@(\d+)$")


@dataclass
class Spectrogram:
    """Log-magnitude spectrogram of one ~1 s audio segment (frames × bins)."""
    values: np.ndarray
    segment_index: int = 0
    utterance_id: str = ""

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float32)
        if self.values.shape != SPECTROGRAM_SHAPE:
            raise DimensionError("spectrogram must be 128×128", self.values.shape)
        if not np.all(np.isfinite(self.values)):
            raise InputError(f"spectrogram for {self.utterance_id!r} has non-finite entries")


@dataclass
class WordEmbeddingSequence:
    """Word vectors of one transcript, zero-padded to 30 rows."""
    vectors: np.ndarray
    utterance_id: str = ""
    true_length: int = TEXT_SHAPE[0]

    def __post_init__(self):
        self.vectors = np.asarray(self.vectors, dtype=np.float32)
        if self.vectors.shape != TEXT_SHAPE:
            raise DimensionError("embedding sequence must be 30×300", self.vectors.shape)
        if not 0 <= self.true_length <= TEXT_SHAPE[0]:
            raise RangeError(f"true_length {self.true_length} outside [0, {TEXT_SHAPE[0]}]")
        if np.any(self.vectors[self.true_length:] != 0):
            raise InputError(f"padding rows of {self.utterance_id!r} are not zero")

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, utterance_id: str = "") -> 'WordEmbeddingSequence':
        """Split or pad an L×300 word-vector matrix to exactly 30 rows."""
        matrix = np.asarray(matrix, dtype=np.float32)
        if matrix.ndim != 2 or matrix.shape[1] != TEXT_SHAPE[1]:
            raise DimensionError("word vectors must be L×300", matrix.shape)
        length = min(matrix.shape[0], TEXT_SHAPE[0])
        vectors = np.zeros(TEXT_SHAPE, dtype=np.float32)
        vectors[:length] = matrix[:length]
        return cls(vectors=vectors, utterance_id=utterance_id, true_length=length)


@dataclass
class LabeledSample:
    """One training example: both modalities plus the emotion label."""
    x_a: Spectrogram
    x_t: WordEmbeddingSequence
    label: int
    utterance_id: str
    conflict_flag: bool = False

    @property
    def segment_index(self) -> int:
        return self.x_a.segment_index


def format_sample_id(utterance_id: str, segment_index: int) -> str:
    """Render the id stored in feature files (``utt@3``; segment 0 of plain ids stays plain)."""
    if segment_index == 0 and not _SEGMENT_SUFFIX.match(utterance_id):
        return utterance_id
    return f"{utterance_id}@{segment_index}"


def parse_sample_id(sample_id: str) -> Tuple[str, int]:
    """Inverse of ``format_sample_id``."""
    match = _SEGMENT_SUFFIX.match(sample_id)
    if match:
        return match.group(1), int(match.group(2))
    return sample_id, 0


class Corpus:
    """Column store of labeled samples with a fixed class count."""

    def __init__(self, audio: np.ndarray, text: np.ndarray, lengths: Sequence[int],
                 labels: Sequence[int], utterance_ids: Sequence[str], num_classes: int,
                 segment_indices: Optional[Sequence[int]] = None,
                 conflict_flags: Optional[Sequence[bool]] = None):
        self.audio = np.asarray(audio, dtype=np.float32)
        self.text = np.asarray(text, dtype=np.float32)
        self.lengths = np.asarray(lengths, dtype=np.int64)
        self.labels = np.asarray(labels, dtype=np.int64)
        self.utterance_ids: List[str] = list(utterance_ids)
        self.num_classes = int(num_classes)
        n = self.labels.shape[0]
        self.segment_indices = (np.zeros(n, dtype=np.int64) if segment_indices is None
                                else np.asarray(segment_indices, dtype=np.int64))
        self.conflict_flags = (np.zeros(n, dtype=bool) if conflict_flags is None
                               else np.asarray(conflict_flags, dtype=bool))
        self._validate()

    def _validate(self) -> None:
        n = self.labels.shape[0]
        if self.audio.ndim != 3 or self.text.ndim != 3:
            raise DimensionError("corpus needs N×H×W audio and N×T×D text", self.audio.shape, self.text.shape)
        for name, column in (("audio", self.audio), ("text", self.text), ("lengths", self.lengths),
                             ("segments", self.segment_indices), ("conflicts", self.conflict_flags)):
            if column.shape[0] != n:
                raise DimensionError(f"corpus column '{name}' has wrong length", column.shape, (n,))
        if len(self.utterance_ids) != n:
            raise DimensionError("corpus ids have wrong length", (len(self.utterance_ids),), (n,))
        if n and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            bad = int(self.labels[(self.labels < 0) | (self.labels >= self.num_classes)][0])
            raise RangeError(f"label {bad} outside [0, {self.num_classes})")
        if n and (self.lengths.min() < 0 or self.lengths.max() > self.text.shape[1]):
            raise RangeError(f"text lengths must lie in [0, {self.text.shape[1]}]")

    @classmethod
    def from_samples(cls, samples: Sequence[LabeledSample], num_classes: int) -> 'Corpus':
        if not samples:
            return cls.empty(num_classes)
        return cls(
            audio=np.stack([s.x_a.values for s in samples]),
            text=np.stack([s.x_t.vectors for s in samples]),
            lengths=[s.x_t.true_length for s in samples],
            labels=[s.label for s in samples],
            utterance_ids=[s.utterance_id for s in samples],
            num_classes=num_classes,
            segment_indices=[s.segment_index for s in samples],
            conflict_flags=[s.conflict_flag for s in samples],
        )

    @classmethod
    def empty(cls, num_classes: int) -> 'Corpus':
        return cls(np.zeros((0,) + SPECTROGRAM_SHAPE), np.zeros((0,) + TEXT_SHAPE), [], [], [],
                   num_classes)

    def __len__(self) -> int:
        return int(self.labels.shape[0])

    def __getitem__(self, index: int) -> LabeledSample:
        uid = self.utterance_ids[index]
        segment = int(self.segment_indices[index])
        return LabeledSample(
            x_a=Spectrogram(self.audio[index], segment_index=segment, utterance_id=uid),
            x_t=WordEmbeddingSequence(self.text[index], utterance_id=uid,
                                      true_length=int(self.lengths[index])),
            label=int(self.labels[index]),
            utterance_id=uid,
            conflict_flag=bool(self.conflict_flags[index]),
        )

    def __iter__(self) -> Iterator[LabeledSample]:
        for i in range(len(self)):
            yield self[i]

    def subset(self, indices: Sequence[int]) -> 'Corpus':
        indices = np.asarray(indices, dtype=np.int64)
        return Corpus(
            audio=self.audio[indices],
            text=self.text[indices],
            lengths=self.lengths[indices],
            labels=self.labels[indices],
            utterance_ids=[self.utterance_ids[i] for i in indices],
            num_classes=self.num_classes,
            segment_indices=self.segment_indices[indices],
            conflict_flags=self.conflict_flags[indices],
        )

    def concat(self, other: 'Corpus') -> 'Corpus':
        if other.num_classes != self.num_classes:
            raise RangeError("cannot join corpora with different class counts")
        if len(self) == 0:
            return other
        if len(other) == 0:
            return self
        return Corpus(
            audio=np.concatenate([self.audio, other.audio]),
            text=np.concatenate([self.text, other.text]),
            lengths=np.concatenate([self.lengths, other.lengths]),
            labels=np.concatenate([self.labels, other.labels]),
            utterance_ids=self.utterance_ids + other.utterance_ids,
            num_classes=self.num_classes,
            segment_indices=np.concatenate([self.segment_indices, other.segment_indices]),
            conflict_flags=np.concatenate([self.conflict_flags, other.conflict_flags]),
        )

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_classes)

    def sample_ids(self) -> List[str]:
        return [format_sample_id(u, int(s)) for u, s in zip(self.utterance_ids, self.segment_indices)]
