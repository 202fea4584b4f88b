"""
Short-time Fourier analysis and the 128×128 spectrogram recipe.

Audio is cut into non-overlapping segments of 16640 samples
(256 + 127·128), so a 256-point STFT with a 128-sample hop yields
exactly 128 frames per segment. The DC bin is dropped, leaving
128 frequency bins, and magnitudes are log-compressed with a floor.
"""

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Union

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.io import wavfile
from scipy.signal import windows

from ..data.corpus import Spectrogram
from ..exceptions import InputError
from .fft import FFT_SIZE, radix2_fft

logger = logging.getLogger(__name__)

SAMPLE_RATE_HZ = 16000
HOP_LENGTH = FFT_SIZE // 2
FRAMES_PER_SEGMENT = 128
SEGMENT_SAMPLES = FFT_SIZE + (FRAMES_PER_SEGMENT - 1) * HOP_LENGTH
LOG_FLOOR = 1e-10


@dataclass
class Waveform:
    """Mono audio with samples in [-1, 1]."""
    samples: np.ndarray
    sample_rate_hz: int = SAMPLE_RATE_HZ

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or self.samples.size == 0:
            raise InputError("waveform must be a non-empty 1-D array")
        if self.sample_rate_hz <= 0:
            raise InputError(f"sample rate must be positive, got {self.sample_rate_hz}")
        if np.max(np.abs(self.samples)) > 1.0:
            raise InputError("waveform samples must lie in [-1, 1]")

    def __len__(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return len(self) / self.sample_rate_hz


def hann_window(n: int = FFT_SIZE) -> np.ndarray:
    """Periodic Hann window, the usual choice for STFT analysis."""
    return windows.hann(n, sym=False)


def stft(w: Waveform, n_fft: int = FFT_SIZE, hop: int = HOP_LENGTH) -> np.ndarray:
    """
    Magnitude STFT.

    Args:
        w: Input waveform
        n_fft: Frame length (power of two)
        hop: Stride between frame starts

    Returns:
        frames × (n_fft/2 + 1) matrix of one-sided magnitudes; the frame
        count is floor((len - n_fft) / hop) + 1
    """
    if len(w) < n_fft:
        raise InputError(f"waveform of {len(w)} samples is shorter than one {n_fft}-point frame")
    frames = sliding_window_view(w.samples, n_fft)[::hop]
    spectra = radix2_fft(frames * hann_window(n_fft))
    return np.abs(spectra[:, : n_fft // 2 + 1])


def log_magnitude(magnitude: np.ndarray) -> np.ndarray:
    return np.log(np.maximum(magnitude, LOG_FLOOR))


def make_spectrograms(w: Waveform, utterance_id: str = "") -> List[Spectrogram]:
    """
    Cut a 16 kHz waveform into one-second segments and compute their spectrograms.

    A trailing remainder shorter than one segment is dropped; a waveform
    shorter than one segment produces an empty list and a warning.
    """
    if w.sample_rate_hz != SAMPLE_RATE_HZ:
        raise InputError(
            f"expected {SAMPLE_RATE_HZ} Hz audio for {utterance_id or 'waveform'}, "
            f"got {w.sample_rate_hz} Hz"
        )
    n_segments = len(w) // SEGMENT_SAMPLES
    if n_segments == 0:
        logger.warning(
            f"{utterance_id or 'waveform'}: {len(w)} samples is shorter than one "
            f"{SEGMENT_SAMPLES}-sample segment, no spectrograms produced"
        )
        return []

    spectrograms = []
    for k in range(n_segments):
        segment = Waveform(w.samples[k * SEGMENT_SAMPLES:(k + 1) * SEGMENT_SAMPLES], w.sample_rate_hz)
        magnitudes = stft(segment)
        values = log_magnitude(magnitudes[:, 1:]).astype(np.float32)
        spectrograms.append(Spectrogram(values, segment_index=k, utterance_id=utterance_id))

    dropped = len(w) - n_segments * SEGMENT_SAMPLES
    logger.debug(f"{utterance_id}: {n_segments} segments, {dropped} trailing samples dropped")
    return spectrograms


def read_wav(path: Union[str, Path]) -> Waveform:
    """Read a mono PCM or float WAV file into a Waveform scaled to [-1, 1]."""
    rate, data = wavfile.read(str(path))
    if data.ndim != 1:
        raise InputError(f"{path}: expected mono audio, got {data.shape[1]} channels")
    if data.dtype == np.int16:
        samples = data / 32768.0
    elif data.dtype == np.int32:
        samples = data / 2147483648.0
    elif data.dtype == np.uint8:
        samples = (data.astype(np.float64) - 128.0) / 128.0
    elif data.dtype.kind == "f":
        samples = np.clip(data.astype(np.float64), -1.0, 1.0)
    else:
        raise InputError(f"{path}: unsupported sample format {data.dtype}")
    if samples.size == 0:
        raise InputError(f"{path}: file contains no samples")
    return Waveform(samples, int(rate))
