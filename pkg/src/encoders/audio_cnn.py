"""
Spectrogram encoder: stacked (3×3 conv → ReLU → 2×2 max-pool) blocks.

With the default configuration four blocks of 8 channels reduce a
1×128×128 spectrogram to 8×8×8, flattened into a 512-dim embedding.
"""

from typing import Optional

import numpy as np

from ..exceptions import DimensionError
from ..models import AudioEncoderConfig
from ..tensor import ParamStore, Tensor, ops

PREFIX = "audio_cnn"


def init_audio_params(store: ParamStore, config: AudioEncoderConfig,
                      rng: np.random.Generator, dtype=np.float32) -> None:
    """Register conv kernels (uniform ±1/√fan_in) and zero biases."""
    in_channels = 1
    for i in range(config.layers):
        bound = 1.0 / np.sqrt(in_channels * 9)
        kernel = rng.uniform(-bound, bound, size=(config.channels, in_channels, 3, 3))
        store.add(f"{PREFIX}.layer{i}.kernel", kernel.astype(dtype))
        store.add(f"{PREFIX}.layer{i}.bias", np.zeros(config.channels, dtype=dtype))
        in_channels = config.channels


def audio_encode(x_a: Tensor, params: ParamStore,
                 config: Optional[AudioEncoderConfig] = None) -> Tensor:
    """
    Encode a batch of spectrograms.

    Args:
        x_a: B×1×S×S input
        params: Store holding ``audio_cnn.layer{i}.{kernel,bias}``
        config: Encoder shape; defaults to the 4-layer, 8-channel network

    Returns:
        B×embedding_dim tensor
    """
    config = config or AudioEncoderConfig()
    size = config.input_size
    if x_a.ndim != 4 or x_a.shape[1:] != (1, size, size):
        raise DimensionError("audio encoder expects B×1×S×S input", x_a.shape, (1, size, size))

    h = x_a
    for i in range(config.layers):
        h = ops.conv2d(h, params[f"{PREFIX}.layer{i}.kernel"], params[f"{PREFIX}.layer{i}.bias"])
        h = ops.maxpool2d(ops.relu(h))
    return ops.flatten(h)
