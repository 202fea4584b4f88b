"""
Radix-2 fast Fourier transform.

The transform runs over the last axis, so a stack of frames is
processed in one vectorized pass.
"""

from functools import lru_cache

import numpy as np

from ..exceptions import DimensionError

FFT_SIZE = 256


@lru_cache(maxsize=8)
def _bit_reversal(n: int) -> np.ndarray:
    bits = n.bit_length() - 1
    return np.array([int(format(i, f"0{bits}b")[::-1], 2) for i in range(n)], dtype=np.int64)


def radix2_fft(x: np.ndarray) -> np.ndarray:
    """
    Unnormalized forward DFT of any power-of-two length, along the last axis.

    Iterative decimation in time: inputs are permuted into bit-reversed
    order, then butterflies of width 2, 4, ..., n combine the halves.
    """
    a = np.asarray(x, dtype=np.complex128)
    n = a.shape[-1]
    if n < 1 or n & (n - 1):
        raise DimensionError("radix-2 FFT needs a power-of-two length", a.shape)

    lead = a.shape[:-1]
    a = a[..., _bit_reversal(n)]
    size = 2
    while size <= n:
        half = size // 2
        twiddle = np.exp(-2j * np.pi * np.arange(half) / size)
        blocks = a.reshape(lead + (n // size, size))
        even = blocks[..., :half]
        odd = blocks[..., half:] * twiddle
        a = np.concatenate([even + odd, even - odd], axis=-1).reshape(lead + (n,))
        size *= 2
    return a


def fft(signal: np.ndarray) -> np.ndarray:
    """
    256-point FFT, X[k] = sum_n x[n] exp(-2πi kn/256).

    Args:
        signal: Real or complex array whose last axis has length 256

    Returns:
        Complex array of the same shape
    """
    signal = np.asarray(signal)
    if signal.ndim == 0 or signal.shape[-1] != FFT_SIZE:
        raise DimensionError(f"fft expects length {FFT_SIZE}", signal.shape)
    return radix2_fft(signal)
