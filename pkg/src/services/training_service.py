"""
Training service.

Runs the mini-batch loop over the combined objective, tracks the
per-epoch loss curve and validation metrics, and keeps the weights
of the epoch with the best validation UA.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import List, Optional

import numpy as np

from ..data.batching import BatchSampler
from ..data.corpus import Corpus
from ..exceptions import ConfigurationError, NumericalError
from ..models import ModelConfig, TrainConfig
from ..tensor import Tape, backward
from ..training.checkpoint import Checkpoint
from ..training.model import FusionModel
from ..training.optimizer import Adam
from .evaluation_service import EvaluationService

# component id of the batch-order generator (model init uses 0-3)
_BATCH_STREAM = 100


class RunStatus(Enum):
    """Status codes for training-based operations."""
    SUCCESS = "success"
    FAILED = "failed"


@dataclass
class EpochRecord:
    epoch: int
    loss: float
    l1: float
    l2: float
    val_wa: float
    val_ua: float


@dataclass
class TrainingResult:
    """Result of one training run."""
    status: RunStatus
    checkpoint: Optional[Checkpoint]
    curve: List[EpochRecord] = field(default_factory=list)
    best_epoch: int = 0
    best_val_wa: float = float("nan")
    best_val_ua: float = float("nan")
    message: str = ""
    error: Optional[str] = None

    @property
    def success(self) -> bool:
        return self.status == RunStatus.SUCCESS


class TrainingService:
    """Service training the fusion network on one split."""

    def __init__(self, model_config: Optional[ModelConfig] = None,
                 evaluation_service: Optional[EvaluationService] = None,
                 dtype=np.float32):
        self.logger = logging.getLogger(__name__)
        self.model_config = model_config or ModelConfig()
        self.evaluation_service = evaluation_service or EvaluationService()
        self.dtype = dtype

    def train(self, train_set: Corpus, validation_set: Optional[Corpus],
              cfg: TrainConfig) -> TrainingResult:
        """
        Train one model.

        Args:
            train_set: Training samples (at least two labels)
            validation_set: Samples for model selection; without them the
                last epoch is kept
            cfg: Optimizer and loop settings

        Returns:
            TrainingResult with the selected checkpoint and the loss curve

        Raises:
            NumericalError: A batch produced a non-finite loss
            ConfigurationError: Class counts disagree or only one label is present
        """
        if train_set.num_classes != self.model_config.num_classes:
            raise ConfigurationError(
                f"training data has {train_set.num_classes} classes, "
                f"model expects {self.model_config.num_classes}"
            )
        has_validation = validation_set is not None and len(validation_set) > 0

        model = FusionModel.initialize(self.model_config, seed=cfg.seed,
                                       use_discriminator=cfg.use_discriminator, dtype=self.dtype)
        rng = np.random.default_rng([cfg.seed, _BATCH_STREAM])
        sampler = BatchSampler(train_set.labels, cfg.batch_size, rng)
        optimizer = Adam(model.params, cfg)

        self.logger.info(
            f"Training on {len(train_set)} samples: alpha={cfg.alpha}, epochs={cfg.epochs}, "
            f"batch={cfg.batch_size}, lr={cfg.learning_rate}, seed={cfg.seed}, "
            f"discriminator={'on' if cfg.use_discriminator else 'off'}"
        )

        curve: List[EpochRecord] = []
        best: Optional[Checkpoint] = None
        best_wa, best_ua = float("nan"), -math.inf

        for epoch in range(1, cfg.epochs + 1):
            loss_sum = l1_sum = l2_sum = 0.0
            l2_count = 0
            for batch_no, batch in enumerate(sampler.epoch()):
                with Tape() as tape:
                    terms = model.batch_loss(train_set, batch, cfg.alpha)
                loss, l1, l2 = terms.values()
                if not (math.isfinite(loss) and math.isfinite(l1)) or (
                        terms.l2 is not None and not math.isfinite(l2)):
                    raise NumericalError(epoch, batch_no, loss, l1, l2)

                optimizer.step(backward(terms.total, tape, model.params))

                loss_sum += loss * batch.size
                l1_sum += l1 * batch.size
                if terms.l2 is not None:
                    l2_sum += l2 * batch.size
                    l2_count += batch.size
                self.logger.debug(f"epoch {epoch} batch {batch_no}: L={loss:.5f} L1={l1:.5f} L2={l2:.5f}")

            val_wa = val_ua = float("nan")
            if has_validation:
                report = self.evaluation_service.evaluate_model(model, validation_set)
                val_wa, val_ua = report.wa, report.ua

            record = EpochRecord(
                epoch=epoch,
                loss=loss_sum / len(train_set),
                l1=l1_sum / len(train_set),
                l2=l2_sum / l2_count if l2_count else float("nan"),
                val_wa=val_wa,
                val_ua=val_ua,
            )
            curve.append(record)
            self.logger.info(
                f"epoch {epoch}/{cfg.epochs}: L={record.loss:.5f} L1={record.l1:.5f} "
                f"L2={record.l2:.5f} val WA={val_wa:.4f} UA={val_ua:.4f}"
            )

            # strict improvement keeps the earliest epoch among ties
            if not has_validation or val_ua > best_ua:
                best = Checkpoint.from_model(model, cfg, epoch, rng)
                best_wa, best_ua = val_wa, val_ua

        best_ua = best_ua if has_validation else float("nan")
        self.logger.info(f"Training finished: best epoch {best.epoch}, val UA {best_ua:.4f}")
        return TrainingResult(
            status=RunStatus.SUCCESS,
            checkpoint=best,
            curve=curve,
            best_epoch=best.epoch,
            best_val_wa=best_wa,
            best_val_ua=best_ua,
            message=f"Trained {cfg.epochs} epochs, kept epoch {best.epoch}",
        )

    def run(self, train_set: Corpus, validation_set: Optional[Corpus],
            cfg: TrainConfig) -> TrainingResult:
        """Like ``train`` but reports failures as a FAILED result instead of raising."""
        try:
            return self.train(train_set, validation_set, cfg)
        except Exception as e:
            self.logger.error(f"Training failed (alpha={cfg.alpha}, seed={cfg.seed}): {e}", exc_info=True)
            return TrainingResult(
                status=RunStatus.FAILED,
                checkpoint=None,
                message="Training run failed",
                error=str(e),
            )
