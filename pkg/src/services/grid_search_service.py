"""
Grid search over the regularization weight α.

One training run per (α, fold); runs are independent and execute in a
thread pool. α* is the grid value with the highest mean validation UA,
ties going to the smaller α.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ..data.corpus import Corpus
from ..data.folds import FoldPlan
from ..exceptions import ConfigurationError
from ..models import TrainConfig
from .training_service import RunStatus, TrainingResult, TrainingService

# value selected on the four-emotion benchmark; reported for reference only
REFERENCE_ALPHA = 0.1


def alpha_grid(step: float = 0.1) -> List[float]:
    """Evenly spaced α values from 0 to 1 inclusive (11 points for step 0.1)."""
    if not 0.0 < step <= 1.0:
        raise ConfigurationError(f"grid step must lie in (0, 1], got {step}")
    count = int(np.floor(1.0 / step + 1e-9))
    values = [round(i * step, 10) for i in range(count + 1)]
    if values[-1] < 1.0 - 1e-9:
        values.append(1.0)
    return values


@dataclass
class GridPoint:
    alpha: float
    folds: List[int]
    fold_ua: List[float]
    fold_wa: List[float]
    mean_ua: float
    mean_wa: float
    status: RunStatus
    error: Optional[str] = None


@dataclass
class GridSearchResult:
    points: List[GridPoint]
    selected_alpha: Optional[float]
    reference_alpha: float = REFERENCE_ALPHA
    extra: Dict[str, object] = field(default_factory=dict)

    @property
    def selected(self) -> Optional[GridPoint]:
        for point in self.points:
            if point.alpha == self.selected_alpha:
                return point
        return None


class GridSearchService:
    """Service sweeping α over cross-validation folds."""

    def __init__(self, training_service: Optional[TrainingService] = None, max_workers: int = 1):
        self.logger = logging.getLogger(__name__)
        self.training_service = training_service or TrainingService()
        self.max_workers = max(1, max_workers)

    def run(self, corpus: Corpus, cfg: TrainConfig, plan: FoldPlan,
            alphas: Optional[Sequence[float]] = None, folds: int = 3) -> GridSearchResult:
        """
        Train every (α, fold) pair and select α*.

        Args:
            corpus: Full dataset the fold plan refers to
            cfg: Base training settings (α is overridden per point)
            plan: Fold assignment; folds 0..folds-1 are used
            alphas: Grid values (default: 0.0, 0.1, ..., 1.0)
            folds: Number of folds to train per α

        Returns:
            GridSearchResult with one row per α in ascending order
        """
        alphas = sorted(alphas if alphas is not None else alpha_grid())
        fold_ids = list(range(min(folds, plan.k)))
        self.logger.info(f"Grid search over {len(alphas)} alphas × {len(fold_ids)} folds "
                         f"with {self.max_workers} workers")

        results: Dict[Tuple[float, int], TrainingResult] = {}
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_task = {
                executor.submit(self._train_point, corpus, cfg, plan, alpha, fold): (alpha, fold)
                for alpha in alphas
                for fold in fold_ids
            }
            for future in as_completed(future_to_task):
                alpha, fold = future_to_task[future]
                results[(alpha, fold)] = future.result()
                outcome = results[(alpha, fold)]
                if outcome.success:
                    self.logger.info(f"alpha={alpha} fold={fold}: val UA {outcome.best_val_ua:.4f}")
                else:
                    self.logger.warning(f"alpha={alpha} fold={fold} failed: {outcome.error}")

        points = [self._summarize(alpha, fold_ids, results) for alpha in alphas]
        selected = self.select_alpha(points)
        self.logger.info(f"Selected alpha* = {selected}")
        return GridSearchResult(points=points, selected_alpha=selected)

    def _train_point(self, corpus: Corpus, cfg: TrainConfig, plan: FoldPlan,
                     alpha: float, fold: int) -> TrainingResult:
        split = plan.split(fold)
        point_cfg = TrainConfig(**{**cfg.model_dump(), "alpha": alpha, "use_discriminator": True})
        return self.training_service.run(corpus.subset(split.train), corpus.subset(split.validation),
                                         point_cfg)

    @staticmethod
    def _summarize(alpha: float, fold_ids: List[int],
                   results: Dict[Tuple[float, int], TrainingResult]) -> GridPoint:
        runs = [results[(alpha, f)] for f in fold_ids]
        failed = [r for r in runs if not r.success]
        fold_ua = [r.best_val_ua for r in runs]
        fold_wa = [r.best_val_wa for r in runs]
        if failed:
            return GridPoint(alpha, fold_ids, fold_ua, fold_wa, float("nan"), float("nan"),
                             RunStatus.FAILED, error=failed[0].error)
        return GridPoint(alpha, fold_ids, fold_ua, fold_wa, float(np.mean(fold_ua)),
                         float(np.mean(fold_wa)), RunStatus.SUCCESS)

    @staticmethod
    def select_alpha(points: Sequence[GridPoint]) -> Optional[float]:
        """Highest mean validation UA among successful points; ties go to the smaller α."""
        best: Optional[GridPoint] = None
        for point in sorted(points, key=lambda p: p.alpha):
            if point.status != RunStatus.SUCCESS:
                continue
            if best is None or point.mean_ua > best.mean_ua:
                best = point
        return best.alpha if best is not None else None
