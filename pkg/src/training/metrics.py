"""
Classification metrics: weighted/unweighted accuracy and confusion matrices.

WA is overall accuracy (trace / total). UA is the mean recall over
classes that have support in the evaluated set. Headline numbers are
utterance level: segment scores of one utterance are averaged before
the argmax. Segment-level numbers are reported alongside.
"""

from dataclasses import asdict, dataclass, field
from typing import Any, Dict, List, Sequence, Tuple

import numpy as np

from ..exceptions import DimensionError, InputError, RangeError


@dataclass
class EvalReport:
    wa: float
    ua: float
    per_class_recall: List[float]
    confusion_counts: List[List[int]]
    confusion_rates: List[List[float]]
    n_samples: int
    n_utterances: int
    segment_wa: float
    segment_ua: float
    modality_agreement: float
    audio_only_wa: float
    text_only_wa: float
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


def confusion_matrix(y_true: Sequence[int], y_pred: Sequence[int], num_classes: int) -> np.ndarray:
    """Raw counts; rows are true classes, columns predictions."""
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise DimensionError("label and prediction counts differ", y_true.shape, y_pred.shape)
    for values in (y_true, y_pred):
        if values.size and (values.min() < 0 or values.max() >= num_classes):
            raise RangeError(f"class index outside [0, {num_classes})")
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    return counts


def weighted_accuracy(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        raise InputError("no samples to score")
    return float(np.trace(counts) / total)


def per_class_recall(counts: np.ndarray) -> np.ndarray:
    """Recall per class; classes without support get NaN."""
    support = counts.sum(axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(support > 0, np.diag(counts) / np.maximum(support, 1), np.nan)


def unweighted_accuracy(counts: np.ndarray) -> float:
    recall = per_class_recall(counts)
    if np.all(np.isnan(recall)):
        raise InputError("no samples to score")
    return float(np.nanmean(recall))


def confusion_rates(counts: np.ndarray) -> np.ndarray:
    """Row-normalized confusion; rows without support stay zero."""
    support = counts.sum(axis=1, keepdims=True)
    return np.where(support > 0, counts / np.maximum(support, 1), 0.0)


def group_by_utterance(utterance_ids: Sequence[str], labels: np.ndarray,
                       *scores: np.ndarray) -> Tuple[np.ndarray, List[np.ndarray]]:
    """
    Average score rows that share an utterance id.

    Returns:
        (utterance labels, one averaged score matrix per input), in
        first-appearance order of the utterances
    """
    _, first, inverse = np.unique(np.asarray(utterance_ids, dtype=object).astype(str),
                                  return_index=True, return_inverse=True)
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    group = rank[inverse.reshape(-1)]
    sizes = np.bincount(group, minlength=order.size).astype(np.float64)

    averaged = []
    for matrix in scores:
        sums = np.zeros((order.size, matrix.shape[1]), dtype=np.float64)
        np.add.at(sums, group, matrix.astype(np.float64))
        averaged.append(sums / sizes[:, None])
    return labels[first[order]], averaged


def evaluate_scores(labels: Sequence[int], s: np.ndarray, s_a: np.ndarray, s_t: np.ndarray,
                    utterance_ids: Sequence[str], num_classes: int) -> EvalReport:
    """
    Build an EvalReport from fused and per-modality scores.

    Args:
        labels: True class per sample (segment)
        s, s_a, s_t: N×C fused, audio-only and text-only scores
        utterance_ids: Utterance of each sample; segments of one utterance
            are pooled before prediction
        num_classes: Number of classes C
    """
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        raise InputError("cannot evaluate an empty sample set")
    if s.shape != (labels.size, num_classes) or s_a.shape != s.shape or s_t.shape != s.shape:
        raise DimensionError("score matrices must be N×C", s.shape, s_a.shape, s_t.shape)

    segment_counts = confusion_matrix(labels, s.argmax(axis=1), num_classes)

    utt_labels, (u_s, u_a, u_t) = group_by_utterance(utterance_ids, labels, s, s_a, s_t)
    counts = confusion_matrix(utt_labels, u_s.argmax(axis=1), num_classes)
    recall = per_class_recall(counts)
    audio_pred = u_a.argmax(axis=1)
    text_pred = u_t.argmax(axis=1)

    return EvalReport(
        wa=weighted_accuracy(counts),
        ua=unweighted_accuracy(counts),
        per_class_recall=[None if np.isnan(r) else float(r) for r in recall],
        confusion_counts=counts.tolist(),
        confusion_rates=confusion_rates(counts).tolist(),
        n_samples=int(labels.size),
        n_utterances=int(utt_labels.size),
        segment_wa=weighted_accuracy(segment_counts),
        segment_ua=unweighted_accuracy(segment_counts),
        modality_agreement=float(np.mean(audio_pred == text_pred)),
        audio_only_wa=float(np.mean(audio_pred == utt_labels)),
        text_only_wa=float(np.mean(text_pred == utt_labels)),
    )


def report_from_counts(counts: np.ndarray) -> Dict[str, Any]:
    """WA/UA/recall/rates for a given confusion matrix."""
    counts = np.asarray(counts, dtype=np.int64)
    return {
        "wa": weighted_accuracy(counts),
        "ua": unweighted_accuracy(counts),
        "per_class_recall": per_class_recall(counts).tolist(),
        "confusion_rates": confusion_rates(counts).tolist(),
    }
