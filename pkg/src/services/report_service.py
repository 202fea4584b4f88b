"""
Report writing service.

Every artifact is a pandas DataFrame exported to CSV or a JSON
document rendered with sorted keys, so reruns produce identical
bytes. Timestamps never enter report files.
"""

import json
import logging
import math
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Sequence, Union

import numpy as np
import pandas as pd

PathLike = Union[str, Path]


def _to_builtin(value: Any) -> Any:
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    if is_dataclass(value):
        return asdict(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def _clean_nan(value: Any) -> Any:
    """NaN and infinities become null so the JSON stays standard."""
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {k: _clean_nan(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_clean_nan(v) for v in value]
    return value


def render_json(payload: Any) -> str:
    normalized = json.loads(json.dumps(payload, default=_to_builtin))
    return json.dumps(_clean_nan(normalized), indent=2, sort_keys=True) + "\n"


class ReportService:
    """Service writing JSON and CSV reports."""

    def __init__(self):
        self.logger = logging.getLogger(__name__)

    def write_json(self, path: PathLike, payload: Any) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(render_json(payload), encoding="utf-8")
        self.logger.info(f"Wrote {path}")
        return path

    def write_frame(self, path: PathLike, frame: pd.DataFrame) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n")
        self.logger.info(f"Wrote {path} ({len(frame)} rows)")
        return path

    def loss_curve_frame(self, records: Sequence[Any]) -> pd.DataFrame:
        columns = ["epoch", "loss", "l1", "l2", "val_wa", "val_ua"]
        return pd.DataFrame([asdict(r) for r in records], columns=columns)

    def confusion_frames(self, counts: List[List[int]], rates: List[List[float]]) -> Dict[str, pd.DataFrame]:
        classes = [f"pred_{c}" for c in range(len(counts))]
        frames = {}
        for key, matrix in (("confusion_counts", counts), ("confusion_rates", rates)):
            frame = pd.DataFrame(matrix, columns=classes)
            frame.insert(0, "true_class", list(range(len(matrix))))
            frames[key] = frame
        return frames

    def write_eval_report(self, out_dir: PathLike, report: Any, extra: Dict[str, Any] = None) -> Dict[str, Path]:
        """eval_report.json plus raw and row-normalized confusion CSVs."""
        out_dir = Path(out_dir)
        payload = report.to_dict()
        if extra:
            payload.update(extra)
        paths = {"eval_report": self.write_json(out_dir / "eval_report.json", payload)}
        for key, frame in self.confusion_frames(report.confusion_counts, report.confusion_rates).items():
            paths[key] = self.write_frame(out_dir / f"{key}.csv", frame)
        return paths

    def grid_frame(self, points: Sequence[Any]) -> pd.DataFrame:
        rows = []
        for point in points:
            row = {
                "alpha": point.alpha,
                "mean_val_wa": point.mean_wa,
                "mean_val_ua": point.mean_ua,
                "status": point.status.value,
            }
            for fold, ua in zip(point.folds, point.fold_ua):
                row[f"val_ua_fold{fold}"] = ua
            rows.append(row)
        return pd.DataFrame(rows)

    def gradcheck_frame(self, results: Sequence[Any]) -> pd.DataFrame:
        rows = [
            {
                "case": result.case_name,
                "parameter": check.name,
                "max_rel_error": check.max_rel_error,
                "coords_probed": check.coords_probed,
                "passed": check.max_rel_error < result.report.tolerance,
            }
            for result in results
            for check in result.report.parameters
        ]
        return pd.DataFrame(rows, columns=["case", "parameter", "max_rel_error", "coords_probed", "passed"])

    def comparison_frame(self, rows: Sequence[Any]) -> pd.DataFrame:
        return pd.DataFrame(
            [{"alpha": r.alpha, "seed": r.seed, "test_wa": r.test_wa, "test_ua": r.test_ua,
              "modality_agreement": r.modality_agreement, "status": r.status.value} for r in rows],
            columns=["alpha", "seed", "test_wa", "test_ua", "modality_agreement", "status"],
        )
