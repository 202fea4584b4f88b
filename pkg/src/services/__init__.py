"""
Services package for the fusion emotion toolkit.

This package contains the orchestration layer: training, evaluation,
α grid search, multi-seed comparison, corpus generation, feature
extraction and report writing.
"""

from .training_service import RunStatus, TrainingResult, TrainingService
from .evaluation_service import EvaluationService
from .grid_search_service import GridSearchService, alpha_grid
from .experiment_service import ExperimentService
from .corpus_service import CorpusService
from .featurize_service import FeaturizeService
from .report_service import ReportService

__all__ = [
    'RunStatus', 'TrainingResult', 'TrainingService', 'EvaluationService',
    'GridSearchService', 'alpha_grid', 'ExperimentService', 'CorpusService',
    'FeaturizeService', 'ReportService',
]
