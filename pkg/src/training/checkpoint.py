"""
Versioned checkpoint files.

Layout (little-endian):

    "CFCK" | u32 version | u32 header_len | header (UTF-8 JSON)
    | u32 n_tensors | n × (u32 name_len | name | u32 rank | u32 dims[rank] | f32 data)

The JSON header records the training and model configuration, the
epoch the weights come from and a sha256 digest of the batch-order
generator state. Files are parsed completely before anything is
returned, so a damaged file never yields a partial checkpoint.
"""

import hashlib
import json
import logging
from collections import OrderedDict
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Union

import numpy as np
from pydantic import ValidationError

from ..exceptions import FeatureFormatError
from ..models import ModelConfig, TrainConfig
from ..utils.binary_io import ByteReader, ByteWriter
from .model import FusionModel

logger = logging.getLogger(__name__)

MAGIC = b"CFCK"
VERSION = 1


@dataclass
class Checkpoint:
    params: Dict[str, np.ndarray]
    train_config: TrainConfig
    model_config: ModelConfig
    epoch: int
    rng_digest: str = ""

    @classmethod
    def from_model(cls, model: FusionModel, train_config: TrainConfig, epoch: int,
                   rng: np.random.Generator = None) -> 'Checkpoint':
        return cls(
            params=model.params.arrays(),
            train_config=train_config,
            model_config=model.config,
            epoch=epoch,
            rng_digest=rng_state_digest(rng) if rng is not None else "",
        )

    def to_model(self) -> FusionModel:
        """Rebuild the network and load the stored weights (float32)."""
        model = FusionModel.initialize(
            self.model_config,
            seed=self.train_config.seed,
            use_discriminator=self.train_config.use_discriminator,
            dtype=np.float32,
        )
        model.params.load_arrays(self.params, strict=True)
        return model


def rng_state_digest(rng: np.random.Generator) -> str:
    state = json.dumps(rng.bit_generator.state, sort_keys=True, default=str)
    return hashlib.sha256(state.encode("utf-8")).hexdigest()


def encode_checkpoint(checkpoint: Checkpoint) -> bytes:
    header = json.dumps({
        "train_config": checkpoint.train_config.model_dump(),
        "model_config": checkpoint.model_config.model_dump(),
        "epoch": checkpoint.epoch,
        "rng_digest": checkpoint.rng_digest,
    }, sort_keys=True)

    writer = ByteWriter()
    writer.raw(MAGIC)
    writer.u32(VERSION)
    writer.text(header)
    writer.u32(len(checkpoint.params))
    for name, array in checkpoint.params.items():
        writer.text(name)
        writer.u32(array.ndim)
        for dim in array.shape:
            writer.u32(dim)
        writer.f32(array)
    return writer.getvalue()


def decode_checkpoint(data: bytes, path: str = "<memory>") -> Checkpoint:
    reader = ByteReader(data, path)
    magic = reader.take(4)
    if magic != MAGIC:
        raise FeatureFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", path, 0)
    version = reader.u32()
    if version != VERSION:
        raise FeatureFormatError(f"unsupported checkpoint version {version}", path, 4)

    header_offset = reader.offset
    try:
        header = json.loads(reader.text())
        train_config = TrainConfig(**header["train_config"])
        model_config = ModelConfig(**header["model_config"])
        epoch = int(header["epoch"])
        digest = str(header.get("rng_digest", ""))
    except (ValueError, KeyError, TypeError, ValidationError) as e:
        if isinstance(e, FeatureFormatError):
            raise
        raise FeatureFormatError(f"invalid checkpoint header: {e}", path, header_offset) from e

    params: Dict[str, np.ndarray] = OrderedDict()
    for _ in range(reader.u32()):
        name = reader.text()
        rank = reader.u32()
        shape = tuple(reader.u32() for _ in range(rank))
        params[name] = reader.f32(int(np.prod(shape, dtype=np.int64))).reshape(shape)
    reader.expect_end()

    return Checkpoint(params=params, train_config=train_config, model_config=model_config,
                      epoch=epoch, rng_digest=digest)


def save_checkpoint(path: Union[str, Path], checkpoint: Checkpoint) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_checkpoint(checkpoint))
    logger.info(f"Saved checkpoint (epoch {checkpoint.epoch}) to {path}")
    return path


def load_checkpoint(path: Union[str, Path]) -> Checkpoint:
    path = Path(path)
    checkpoint = decode_checkpoint(path.read_bytes(), str(path))
    logger.info(f"Loaded checkpoint (epoch {checkpoint.epoch}) from {path}")
    return checkpoint
