"""
Training objectives.

- ``cross_entropy_loss``: softmax cross-entropy on fused scores (L1)
- ``info_nce_loss``: discriminator-scored InfoNCE over in-batch
  different-emotion negatives (L2)
- ``combined_loss``: L = (1 - α)·L1 + α·L2

All reductions are batch means and every log-partition goes through
a max-shifted log-sum-exp.
"""

from typing import Optional, Sequence, Union

import numpy as np

from ..exceptions import ContractError, DimensionError, RangeError
from ..tensor import Tensor, ops
from .classifier import EmbeddingPair, ScoreVector
from .discriminator import Discriminator


def cross_entropy_loss(s: Union[ScoreVector, Tensor], labels: Sequence[int]) -> Tensor:
    """Mean of logsumexp(s_i) - s_i[y_i] over the batch."""
    scores = s.s if isinstance(s, ScoreVector) else ops.as_tensor(s)
    labels = np.asarray(labels, dtype=np.int64)
    if scores.ndim != 2 or labels.shape != (scores.shape[0],):
        raise DimensionError("one label per score row required", scores.shape, labels.shape)
    num_classes = scores.shape[1]
    if labels.size and (labels.min() < 0 or labels.max() >= num_classes):
        bad = labels[(labels < 0) | (labels >= num_classes)][0]
        raise RangeError(f"label {bad} outside [0, {num_classes})")
    return ops.mean(ops.sub(ops.logsumexp(scores, axis=1), ops.pick(scores, labels)))


def info_nce_from_scores(scores: Tensor, offsets: Sequence[int]) -> Tensor:
    """
    InfoNCE given grouped discriminator scores.

    Args:
        scores: Flat vector of pair scores; group k occupies
            scores[offsets[k]:offsets[k+1]] with its positive pair first
        offsets: Group boundaries (G+1 entries)

    Returns:
        Mean over groups of logsumexp(group) - positive score
    """
    scores = ops.as_tensor(scores)
    offsets = np.asarray(offsets, dtype=np.int64)
    if offsets.size < 2 or np.any(np.diff(offsets) < 2):
        raise ContractError("every anchor needs at least one negative")
    lse = ops.segment_logsumexp(scores, offsets)
    column = ops.reshape(scores, (scores.shape[0], 1))
    positives = ops.reshape(ops.take_rows(column, offsets[:-1]), (offsets.size - 1,))
    return ops.mean(ops.sub(lse, positives))


def info_nce_loss(anchors: EmbeddingPair, negatives: Sequence[Sequence[int]],
                  disc: Discriminator, anchor_index: Optional[Sequence[int]] = None) -> Tensor:
    """
    Contrastive loss of positive pairs against different-emotion text negatives.

    Args:
        anchors: Batch embeddings; pair i is (e_a[i], e_t[i])
        negatives: For each batch row, the rows whose text embeddings serve
            as its negatives
        disc: Pair discriminator
        anchor_index: Rows that take part in the loss (all rows by default)

    Returns:
        Scalar batch-mean loss

    Raises:
        ContractError: A participating anchor has no negatives, or there are no anchors
    """
    if len(negatives) != anchors.batch_size:
        raise DimensionError("one negative set per batch row required",
                             (len(negatives),), (anchors.batch_size,))
    rows = range(anchors.batch_size) if anchor_index is None else anchor_index
    audio_rows, text_rows, offsets = [], [], [0]
    for i in rows:
        negs = list(negatives[i])
        if not negs:
            raise ContractError(f"anchor {i} has an empty negative set")
        audio_rows.extend([i] * (len(negs) + 1))
        text_rows.append(i)
        text_rows.extend(negs)
        offsets.append(len(text_rows))
    if len(offsets) < 2:
        raise ContractError("InfoNCE needs at least one anchor")

    scores = disc.score_pairs(ops.take_rows(anchors.e_a, audio_rows),
                              ops.take_rows(anchors.e_t, text_rows))
    return info_nce_from_scores(scores, offsets)


def combined_loss(l1: Union[Tensor, float], l2: Optional[Union[Tensor, float]],
                  alpha: float) -> Tensor:
    """
    L = (1 - α)·L1 + α·L2.

    With ``l2=None`` (no anchor in the batch has negatives, or the model
    has no discriminator) the regularizer term is absent and L = (1 - α)·L1.
    """
    if not 0.0 <= alpha <= 1.0:
        raise RangeError(f"alpha must lie in [0, 1], got {alpha}")
    classification = ops.scale(ops.as_tensor(l1), 1.0 - alpha)
    if l2 is None:
        return classification
    return ops.add(classification, ops.scale(ops.as_tensor(l2), alpha))
