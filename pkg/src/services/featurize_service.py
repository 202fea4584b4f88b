"""
Feature extraction service for recorded corpora.

Input is a CSV manifest with one row per utterance (``utterance_id``,
``label``, ``embedding``). Each utterance's WAV lives at
``<wav_dir>/<utterance_id>.wav`` and its word vectors in the ``.npy``
file named by ``embedding`` (resolved against the manifest's
directory). Every one-second segment becomes one sample that shares
the utterance's label and embedding sequence.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Union

import numpy as np
import pandas as pd

from ..data.corpus import Corpus, LabeledSample, WordEmbeddingSequence
from ..dsp.feature_io import save_features, write_manifest
from ..dsp.spectrogram import make_spectrograms, read_wav
from ..exceptions import ConfigurationError, InputError, RangeError

PathLike = Union[str, Path]

REQUIRED_COLUMNS = ("utterance_id", "label", "embedding")
FEATURE_FILE = "features.cfe"
MANIFEST_FILE = "manifest.txt"


@dataclass
class FeaturizeSummary:
    utterances: int
    segments: int
    skipped: List[str] = field(default_factory=list)
    paths: Dict[str, Path] = field(default_factory=dict)


def _parse_label(value: object, utterance_id: str, manifest_path: Path) -> int:
    try:
        return int(str(value).strip())
    except ValueError as e:
        raise InputError(
            f"{manifest_path}: utterance {utterance_id!r} has non-integer label {value!r}"
        ) from e


class FeaturizeService:
    """Service turning WAV files and word-vector matrices into feature files."""

    def __init__(self, num_classes: int = 4, max_workers: int = 1):
        self.logger = logging.getLogger(__name__)
        self.num_classes = num_classes
        self.max_workers = max(1, max_workers)

    def read_utterance_table(self, manifest_path: PathLike) -> pd.DataFrame:
        manifest_path = Path(manifest_path)
        table = pd.read_csv(manifest_path, dtype={"utterance_id": str, "embedding": str})
        missing = [c for c in REQUIRED_COLUMNS if c not in table.columns]
        if missing:
            raise ConfigurationError(f"{manifest_path}: missing columns {missing}")
        if table["utterance_id"].duplicated().any():
            dup = table.loc[table["utterance_id"].duplicated(), "utterance_id"].iloc[0]
            raise ConfigurationError(f"{manifest_path}: utterance {dup!r} listed twice")
        return table

    def featurize_utterance(self, utterance_id: str, label: int, wav_path: Path,
                            embedding_path: Path) -> List[LabeledSample]:
        """All segment samples of one utterance (empty when the audio is too short)."""
        if not 0 <= label < self.num_classes:
            raise RangeError(f"utterance {utterance_id!r}: label {label} outside [0, {self.num_classes})")
        if not embedding_path.is_file():
            raise InputError(f"utterance {utterance_id!r}: embedding file {embedding_path} not found")
        if not wav_path.is_file():
            raise InputError(f"utterance {utterance_id!r}: audio file {wav_path} not found")

        matrix = np.load(embedding_path, allow_pickle=False)
        if matrix.ndim != 2 or matrix.shape[0] < 1:
            raise InputError(f"utterance {utterance_id!r}: embedding must be a non-empty L×300 matrix")
        x_t = WordEmbeddingSequence.from_matrix(matrix, utterance_id)

        waveform = read_wav(wav_path)
        try:
            spectrograms = make_spectrograms(waveform, utterance_id)
        except InputError as e:
            raise InputError(f"{wav_path}: {e}") from e

        return [LabeledSample(x_a=spec, x_t=x_t, label=label, utterance_id=utterance_id)
                for spec in spectrograms]

    def featurize(self, wav_dir: PathLike, manifest_path: PathLike, out_dir: PathLike) -> FeaturizeSummary:
        """
        Extract features for every utterance in the manifest.

        Args:
            wav_dir: Directory holding ``<utterance_id>.wav`` files
            manifest_path: CSV with utterance_id, label, embedding columns
            out_dir: Destination for ``features.cfe`` and ``manifest.txt``

        Returns:
            FeaturizeSummary with counts and written paths

        Raises:
            InputError: Missing embedding/audio or wrong sample rate
        """
        wav_dir = Path(wav_dir)
        manifest_path = Path(manifest_path)
        out_dir = Path(out_dir)
        table = self.read_utterance_table(manifest_path)
        self.logger.info(f"Featurizing {len(table)} utterances from {manifest_path}")

        per_utterance: Dict[int, List[LabeledSample]] = {}
        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            future_to_row = {}
            for row_no, row in enumerate(table.itertuples(index=False)):
                embedding_path = Path(row.embedding)
                if not embedding_path.is_absolute():
                    embedding_path = manifest_path.parent / embedding_path
                label = _parse_label(row.label, row.utterance_id, manifest_path)
                future = executor.submit(self.featurize_utterance, row.utterance_id, label,
                                         wav_dir / f"{row.utterance_id}.wav", embedding_path)
                future_to_row[future] = row_no
            for future in as_completed(future_to_row):
                per_utterance[future_to_row[future]] = future.result()

        samples: List[LabeledSample] = []
        skipped: List[str] = []
        for row_no in range(len(table)):
            if not per_utterance[row_no]:
                skipped.append(table["utterance_id"].iloc[row_no])
            samples.extend(per_utterance[row_no])
        if skipped:
            self.logger.warning(f"{len(skipped)} utterances shorter than one segment were skipped")

        corpus = Corpus.from_samples(samples, self.num_classes)
        feature_path = save_features(out_dir / FEATURE_FILE, corpus)
        manifest_out = write_manifest(out_dir / MANIFEST_FILE, [feature_path],
                                      comment=f"features of {manifest_path.name}")
        return FeaturizeSummary(
            utterances=len(table) - len(skipped),
            segments=len(corpus),
            skipped=skipped,
            paths={"features": feature_path, "manifest": manifest_out},
        )
