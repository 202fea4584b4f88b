"""
Synthetic corpus generation service.

Writes a generated corpus as a feature file, a one-line manifest and a
``corpus.meta`` sidecar with the generator settings and class/conflict
statistics.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Union

from ..data.corpus import Corpus
from ..data.synth import generate
from ..dsp.feature_io import save_features, write_manifest
from ..models import SynthConfig

PathLike = Union[str, Path]

FEATURE_FILE = "corpus.cfe"
MANIFEST_FILE = "manifest.txt"
META_FILE = "corpus.meta"


@dataclass
class CorpusSummary:
    """What gencorpus produced."""
    samples: int
    class_counts: List[int]
    conflicts: int
    paths: Dict[str, Path] = field(default_factory=dict)

    @property
    def conflict_rate(self) -> float:
        return self.conflicts / self.samples if self.samples else 0.0


def render_meta(cfg: SynthConfig, corpus: Corpus) -> str:
    """key=value sidecar; no timestamps so reruns are byte-identical."""
    lines = [
        f"C={cfg.classes}",
        f"rho={cfg.rho!r}",
        f"sigma={cfg.sigma!r}",
        f"seed={cfg.seed}",
    ]
    lines.extend(f"count_{c}={int(n)}" for c, n in enumerate(corpus.class_counts()))
    lines.append(f"conflicts={int(corpus.conflict_flags.sum())}")
    return "\n".join(lines) + "\n"


def read_meta(path: PathLike) -> Dict[str, str]:
    entries = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if "=" in line:
            key, value = line.split("=", 1)
            entries[key.strip()] = value.strip()
    return entries


class CorpusService:
    """Service generating and storing synthetic corpora."""

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def generate_to(self, cfg: SynthConfig, out_dir: PathLike) -> CorpusSummary:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

        corpus = generate(cfg)
        feature_path = save_features(out_dir / FEATURE_FILE, corpus)
        manifest_path = write_manifest(out_dir / MANIFEST_FILE, [feature_path],
                                       comment=f"synthetic corpus, seed {cfg.seed}")
        meta_path = out_dir / META_FILE
        meta_path.write_text(render_meta(cfg, corpus), encoding="utf-8")

        summary = CorpusSummary(
            samples=len(corpus),
            class_counts=[int(n) for n in corpus.class_counts()],
            conflicts=int(corpus.conflict_flags.sum()),
            paths={"features": feature_path, "manifest": manifest_path, "meta": meta_path},
        )
        self.logger.info(f"Corpus written to {out_dir}: {summary.samples} samples, "
                         f"{summary.conflicts} conflicted")
        return summary
