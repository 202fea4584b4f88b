"""
Binary feature files and manifests.

Layout (little-endian):

    "CFE1" | u32 n_samples | n × sample
    sample = u32 label | u32 id_len | id (UTF-8)
             | f32[128·128] spectrogram | u32 true_length | f32[30·300] embeddings

A manifest is a UTF-8 text file listing one feature file per line;
blank lines and lines starting with ``#`` are ignored, and relative
paths resolve against the manifest's directory.
"""

import errno
import logging
from pathlib import Path
from typing import Iterable, List, Optional, Union

import numpy as np

from ..data.corpus import SPECTROGRAM_SHAPE, TEXT_SHAPE, Corpus, parse_sample_id
from ..exceptions import DimensionError, FeatureFormatError, LabelRangeError
from ..utils.binary_io import ByteReader, ByteWriter

logger = logging.getLogger(__name__)

MAGIC = b"CFE1"
_SPEC_COUNT = SPECTROGRAM_SHAPE[0] * SPECTROGRAM_SHAPE[1]
_TEXT_COUNT = TEXT_SHAPE[0] * TEXT_SHAPE[1]

PathLike = Union[str, Path]


def encode_features(corpus: Corpus) -> bytes:
    """Serialize a corpus with standard feature shapes."""
    if corpus.audio.shape[1:] != SPECTROGRAM_SHAPE or corpus.text.shape[1:] != TEXT_SHAPE:
        raise DimensionError("feature files hold 128×128 spectrograms and 30×300 embeddings",
                             corpus.audio.shape[1:], corpus.text.shape[1:])
    writer = ByteWriter()
    writer.raw(MAGIC)
    writer.u32(len(corpus))
    for i, sample_id in enumerate(corpus.sample_ids()):
        writer.u32(corpus.labels[i])
        writer.text(sample_id)
        writer.f32(corpus.audio[i])
        writer.u32(corpus.lengths[i])
        writer.f32(corpus.text[i])
    return writer.getvalue()


def save_features(path: PathLike, corpus: Corpus) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_features(corpus))
    logger.info(f"Wrote {len(corpus)} samples to {path}")
    return path


def load_feature_file(path: PathLike, num_classes: int = 4) -> Corpus:
    """
    Parse one feature file.

    Args:
        path: Feature file to read
        num_classes: Labels must lie in [0, num_classes)

    Returns:
        Corpus with the file's samples in stored order

    Raises:
        FeatureFormatError: Bad magic, truncation, invalid lengths or trailing bytes
        LabelRangeError: A label outside [0, num_classes)
    """
    path = Path(path)
    reader = ByteReader(path.read_bytes(), str(path))

    magic = reader.take(4)
    if magic != MAGIC:
        raise FeatureFormatError(f"bad magic {magic!r}, expected {MAGIC!r}", str(path), 0)
    count = reader.u32()
    # each sample needs at least its fixed-size fields
    if count * (12 + 4 * (_SPEC_COUNT + _TEXT_COUNT)) > reader.remaining:
        raise FeatureFormatError(f"truncated file: header announces {count} samples", str(path), 4)

    audio = np.zeros((count,) + SPECTROGRAM_SHAPE, dtype=np.float32)
    text = np.zeros((count,) + TEXT_SHAPE, dtype=np.float32)
    lengths = np.zeros(count, dtype=np.int64)
    labels = np.zeros(count, dtype=np.int64)
    segments = np.zeros(count, dtype=np.int64)
    ids: List[str] = []

    for i in range(count):
        label_offset = reader.offset
        label = reader.u32()
        if label >= num_classes:
            raise LabelRangeError(f"label {label} outside [0, {num_classes})", str(path), label_offset)
        sample_id = reader.text()

        spec_offset = reader.offset
        spectrogram = reader.f32(_SPEC_COUNT).reshape(SPECTROGRAM_SHAPE)
        if not np.all(np.isfinite(spectrogram)):
            raise FeatureFormatError("non-finite spectrogram value", str(path), spec_offset)

        length_offset = reader.offset
        true_length = reader.u32()
        if true_length > TEXT_SHAPE[0]:
            raise FeatureFormatError(f"true_length {true_length} exceeds {TEXT_SHAPE[0]}",
                                     str(path), length_offset)
        text_offset = reader.offset
        vectors = reader.f32(_TEXT_COUNT).reshape(TEXT_SHAPE)
        if np.any(vectors[true_length:] != 0):
            raise FeatureFormatError("padding rows are not zero", str(path), text_offset)

        utterance_id, segment = parse_sample_id(sample_id)
        audio[i] = spectrogram
        text[i] = vectors
        lengths[i] = true_length
        labels[i] = label
        segments[i] = segment
        ids.append(utterance_id)

    reader.expect_end()
    return Corpus(audio, text, lengths, labels, ids, num_classes, segment_indices=segments)


def read_manifest(manifest_path: PathLike) -> List[Path]:
    """Feature file paths listed in a manifest, resolved and checked for existence."""
    manifest_path = Path(manifest_path)
    base = manifest_path.parent
    paths = []
    for line in manifest_path.read_text(encoding="utf-8").splitlines():
        entry = line.strip()
        if not entry or entry.startswith("#"):
            continue
        path = Path(entry)
        if not path.is_absolute():
            path = base / path
        if not path.is_file():
            raise FileNotFoundError(errno.ENOENT, "feature file listed in manifest not found", str(path))
        paths.append(path)
    return paths


def write_manifest(manifest_path: PathLike, feature_paths: Iterable[PathLike],
                   comment: Optional[str] = None) -> Path:
    """Write a manifest; paths inside the manifest's directory are stored relative."""
    manifest_path = Path(manifest_path)
    base = manifest_path.parent.resolve()
    lines = []
    if comment:
        lines.extend(f"# {row}" for row in comment.splitlines())
    for feature_path in feature_paths:
        resolved = Path(feature_path).resolve()
        try:
            lines.append(resolved.relative_to(base).as_posix())
        except ValueError:
            lines.append(str(resolved))
    manifest_path.parent.mkdir(parents=True, exist_ok=True)
    manifest_path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return manifest_path


def load_features(manifest_path: PathLike, num_classes: int = 4) -> Corpus:
    """Load and concatenate every feature file a manifest lists."""
    corpus = Corpus.empty(num_classes)
    for path in read_manifest(manifest_path):
        part = load_feature_file(path, num_classes)
        logger.debug(f"Loaded {len(part)} samples from {path}")
        corpus = corpus.concat(part)
    logger.info(f"Loaded {len(corpus)} samples from manifest {manifest_path}")
    return corpus
