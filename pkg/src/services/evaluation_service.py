"""
Evaluation service: scores a sample set with a trained network and
turns the scores into an EvalReport.
"""

import logging

from ..data.corpus import Corpus
from ..exceptions import ConfigurationError, InputError
from ..training.checkpoint import Checkpoint
from ..training.metrics import EvalReport, evaluate_scores
from ..training.model import FusionModel


class EvaluationService:
    """Service computing WA/UA/confusion reports."""

    def __init__(self, batch_size: int = 128):
        self.logger = logging.getLogger(__name__)
        self.batch_size = batch_size

    def evaluate(self, checkpoint: Checkpoint, samples: Corpus) -> EvalReport:
        """
        Evaluate a checkpoint on a sample set.

        Args:
            checkpoint: Trained weights and configuration
            samples: Labeled samples (segments of one utterance are pooled)

        Returns:
            EvalReport with utterance- and segment-level metrics
        """
        return self.evaluate_model(checkpoint.to_model(), samples)

    def evaluate_model(self, model: FusionModel, samples: Corpus) -> EvalReport:
        if len(samples) == 0:
            raise InputError("cannot evaluate an empty sample set")
        if samples.num_classes != model.config.num_classes:
            raise ConfigurationError(
                f"samples have {samples.num_classes} classes, model has {model.config.num_classes}"
            )
        scores = model.predict_scores(samples, self.batch_size)
        report = evaluate_scores(samples.labels, scores.s, scores.s_a, scores.s_t,
                                 samples.utterance_ids, samples.num_classes)
        self.logger.debug(f"Evaluated {report.n_samples} samples: WA={report.wa:.4f} UA={report.ua:.4f}")
        return report
