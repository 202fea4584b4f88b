"""
Audio feature extraction and feature-file I/O.
"""

from ..data.corpus import Spectrogram, WordEmbeddingSequence
from .fft import FFT_SIZE, fft, radix2_fft
from .spectrogram import (
    LOG_FLOOR, SAMPLE_RATE_HZ, SEGMENT_SAMPLES, Waveform, hann_window, log_magnitude,
    make_spectrograms, read_wav, stft,
)
from .feature_io import load_feature_file, load_features, read_manifest, save_features, write_manifest

__all__ = [
    'Spectrogram', 'WordEmbeddingSequence', 'FFT_SIZE', 'fft', 'radix2_fft',
    'LOG_FLOOR', 'SAMPLE_RATE_HZ', 'SEGMENT_SAMPLES', 'Waveform', 'hann_window',
    'log_magnitude', 'make_spectrograms', 'read_wav', 'stft',
    'load_feature_file', 'load_features', 'read_manifest', 'save_features', 'write_manifest',
]
