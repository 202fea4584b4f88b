"""
Multi-seed comparison of regularization strengths on synthetic corpora.

For every seed a fresh corpus is generated and split; each α in the
comparison is trained on the same split and evaluated on its test
fold. The service reports mean test WA/UA and modality agreement per
α and their differences from the first α (the baseline). It does not
judge the direction of the effect.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from ..data.folds import make_folds
from ..data.synth import generate
from ..models import SynthConfig, TrainConfig
from .evaluation_service import EvaluationService
from .training_service import RunStatus, TrainingService


@dataclass
class ComparisonRow:
    alpha: float
    seed: int
    test_wa: float
    test_ua: float
    modality_agreement: float
    status: RunStatus
    error: Optional[str] = None


@dataclass
class AlphaSummary:
    alpha: float
    runs: int
    mean_test_wa: float
    mean_test_ua: float
    mean_modality_agreement: float


@dataclass
class ComparisonResult:
    rows: List[ComparisonRow]
    summaries: List[AlphaSummary]
    baseline_alpha: float
    gains: Dict[str, Dict[str, float]] = field(default_factory=dict)


class ExperimentService:
    """Service running the α comparison across seeds."""

    def __init__(self, training_service: Optional[TrainingService] = None,
                 evaluation_service: Optional[EvaluationService] = None, max_workers: int = 1):
        self.logger = logging.getLogger(__name__)
        self.evaluation_service = evaluation_service or EvaluationService()
        self.training_service = training_service or TrainingService(
            evaluation_service=self.evaluation_service)
        self.max_workers = max(1, max_workers)

    def compare(self, synth: SynthConfig, cfg: TrainConfig, alphas: Sequence[float] = (0.0, 0.1),
                seeds: int = 5, folds: int = 10, fold: int = 0) -> ComparisonResult:
        """
        Train and test every α on ``seeds`` independently generated corpora.

        Args:
            synth: Corpus settings; its seed is the first of ``seeds`` consecutive seeds
            cfg: Training settings; α and seed are overridden per run
            alphas: Values to compare, the first acting as baseline
            seeds: Number of corpora / training seeds
            folds: Fold count of the split
            fold: Which fold to test on
        """
        model_config = self.training_service.model_config
        audio_shape = (model_config.audio.input_size,) * 2
        text_shape = (model_config.text.seq_len, model_config.text.input_size)

        rows: List[ComparisonRow] = []
        for offset in range(seeds):
            seed = synth.seed + offset
            corpus = generate(synth.model_copy(update={"seed": seed}), audio_shape=audio_shape,
                              text_shape=text_shape)
            split = make_folds(corpus, k=folds, seed=seed).split(fold)
            train_set = corpus.subset(split.train)
            validation_set = corpus.subset(split.validation)
            test_set = corpus.subset(split.test)

            with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
                futures = {
                    executor.submit(self._run_one, train_set, validation_set, test_set, cfg, alpha, seed): alpha
                    for alpha in alphas
                }
                for future in as_completed(futures):
                    rows.append(future.result())

        rows.sort(key=lambda r: (r.seed, list(alphas).index(r.alpha)))
        summaries = [self._summarize(alpha, rows) for alpha in alphas]
        result = ComparisonResult(rows=rows, summaries=summaries, baseline_alpha=alphas[0],
                                  gains=self._gains(summaries))
        for summary in summaries:
            self.logger.info(
                f"alpha={summary.alpha}: mean test WA={summary.mean_test_wa:.4f} "
                f"UA={summary.mean_test_ua:.4f} agreement={summary.mean_modality_agreement:.4f} "
                f"over {summary.runs} runs"
            )
        return result

    def _run_one(self, train_set, validation_set, test_set, cfg: TrainConfig,
                 alpha: float, seed: int) -> ComparisonRow:
        run_cfg = TrainConfig(**{**cfg.model_dump(), "alpha": alpha, "seed": seed,
                                 "use_discriminator": True})
        outcome = self.training_service.run(train_set, validation_set, run_cfg)
        if not outcome.success:
            return ComparisonRow(alpha, seed, float("nan"), float("nan"), float("nan"),
                                 RunStatus.FAILED, outcome.error)
        try:
            report = self.evaluation_service.evaluate(outcome.checkpoint, test_set)
        except Exception as e:
            self.logger.error(f"Evaluation failed (alpha={alpha}, seed={seed}): {e}", exc_info=True)
            return ComparisonRow(alpha, seed, float("nan"), float("nan"), float("nan"),
                                 RunStatus.FAILED, str(e))
        return ComparisonRow(alpha, seed, report.wa, report.ua, report.modality_agreement,
                             RunStatus.SUCCESS)

    @staticmethod
    def _summarize(alpha: float, rows: Sequence[ComparisonRow]) -> AlphaSummary:
        ok = [r for r in rows if r.alpha == alpha and r.status == RunStatus.SUCCESS]
        if not ok:
            return AlphaSummary(alpha, 0, float("nan"), float("nan"), float("nan"))
        return AlphaSummary(
            alpha=alpha,
            runs=len(ok),
            mean_test_wa=float(np.mean([r.test_wa for r in ok])),
            mean_test_ua=float(np.mean([r.test_ua for r in ok])),
            mean_modality_agreement=float(np.mean([r.modality_agreement for r in ok])),
        )

    @staticmethod
    def _gains(summaries: Sequence[AlphaSummary]) -> Dict[str, Dict[str, float]]:
        baseline = summaries[0]
        return {
            str(s.alpha): {
                "test_wa": s.mean_test_wa - baseline.mean_test_wa,
                "test_ua": s.mean_test_ua - baseline.mean_test_ua,
                "modality_agreement": s.mean_modality_agreement - baseline.mean_modality_agreement,
            }
            for s in summaries[1:]
        }
