"""
Model assembly, optimization, metrics and checkpointing.
"""

from .model import FusionModel, LossTerms, ScoreArrays
from .optimizer import Adam, AdamState, adam_step
from .metrics import (
    EvalReport, confusion_matrix, confusion_rates, evaluate_scores, per_class_recall,
    report_from_counts, unweighted_accuracy, weighted_accuracy,
)
from .checkpoint import Checkpoint, decode_checkpoint, encode_checkpoint, load_checkpoint, save_checkpoint

__all__ = [
    'FusionModel', 'LossTerms', 'ScoreArrays', 'Adam', 'AdamState', 'adam_step',
    'EvalReport', 'confusion_matrix', 'confusion_rates', 'evaluate_scores', 'per_class_recall',
    'report_from_counts', 'unweighted_accuracy', 'weighted_accuracy',
    'Checkpoint', 'decode_checkpoint', 'encode_checkpoint', 'load_checkpoint', 'save_checkpoint',
]
