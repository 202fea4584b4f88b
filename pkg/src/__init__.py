"""
Source code package for the fusion emotion toolkit.

This package contains a small autodiff engine, spectrogram features,
the audio/text encoders, the contrastive-regularized fusion objective
and the services that train and evaluate it.
"""
