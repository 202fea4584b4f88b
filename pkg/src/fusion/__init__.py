"""
Fusion classifier, pair discriminator and training losses.
"""

from .classifier import EmbeddingPair, FusionClassifier, ScoreVector, classify, init_classifier_params
from .discriminator import Discriminator, discriminator_score, init_discriminator_params
from .losses import combined_loss, cross_entropy_loss, info_nce_from_scores, info_nce_loss

__all__ = [
    'EmbeddingPair', 'FusionClassifier', 'ScoreVector', 'classify', 'init_classifier_params',
    'Discriminator', 'discriminator_score', 'init_discriminator_params',
    'combined_loss', 'cross_entropy_loss', 'info_nce_from_scores', 'info_nce_loss',
]
