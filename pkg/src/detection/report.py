"""
Detection reports and the collector that builds them.
"""

import json
import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

import numpy as np
import pandas as pd

from ..core.errors import MetricError
from ..metrics import average_precision, calibrate_threshold, false_alarm_rate
from .scoring import ScoreRow

logger = logging.getLogger(__name__)

CSV_COLUMNS = ["path", "score", "argmax", "label", "template_index"]


@dataclass
class DetectionReport:
    """
    Per-image scores plus aggregate metrics.

    Aggregates are recomputable from the rows; ``recompute`` rebuilds them.
    AP and TDR are None when the rows are unlabelled or single-class.
    """
    rows: List[ScoreRow] = field(default_factory=list)
    ap: Optional[float] = None
    tdr: Optional[float] = None
    threshold: Optional[float] = None
    far: float = 0.005
    config_hash: str = ""
    psnr_mean: Optional[float] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    @property
    def real_scores(self) -> List[float]:
        return [row.score for row in self.rows if row.label == 1]

    @property
    def fake_scores(self) -> List[float]:
        return [row.score for row in self.rows if row.label == 0]

    def recompute(self, threshold: Optional[float] = None) -> "DetectionReport":
        """
        Recompute aggregates from the rows.

        Args:
            threshold: Fixed threshold; calibrated on the real scores at
                ``far`` when omitted
        """
        labelled = [row for row in self.rows if row.label is not None]
        reals, fakes = self.real_scores, self.fake_scores

        self.ap = None
        if reals and fakes:
            try:
                self.ap = average_precision([r.score for r in labelled], [r.label for r in labelled])
            except MetricError:
                self.ap = None

        self.threshold = threshold
        if self.threshold is None and reals:
            self.threshold = calibrate_threshold(reals, self.far)

        self.tdr = None
        if self.threshold is not None and fakes:
            self.tdr = float(np.mean(np.asarray(fakes) < self.threshold))
        if self.threshold is not None and reals:
            self.metadata["empirical_far"] = false_alarm_rate(reals, self.threshold)
        return self

    def flagged(self) -> List[ScoreRow]:
        """Rows scoring strictly below the threshold."""
        if self.threshold is None:
            return []
        return [row for row in self.rows if row.score < self.threshold]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.to_dict() for row in self.rows], columns=CSV_COLUMNS)

    def to_dict(self) -> Dict[str, Any]:
        """Aggregates for JSON export."""
        return {
            "config_hash": self.config_hash,
            "images": len(self.rows),
            "real_count": len(self.real_scores),
            "fake_count": len(self.fake_scores),
            "ap": self.ap,
            "tdr": self.tdr,
            "far": self.far,
            "threshold": self.threshold,
            "psnr_mean": None if self.psnr_mean is None or math.isinf(self.psnr_mean) else self.psnr_mean,
            "metadata": self.metadata,
        }

    def save(self, output_dir: Union[str, Path], name: str = "detection") -> Dict[str, Path]:
        """Write ``<name>.json`` (aggregates) and ``<name>.csv`` (rows)."""
        output_dir = Path(output_dir)
        output_dir.mkdir(parents=True, exist_ok=True)
        json_path = output_dir / f"{name}.json"
        csv_path = output_dir / f"{name}.csv"

        with open(json_path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
        self.to_frame().to_csv(csv_path, index=False)

        logger.info(f"Detection report saved: {json_path}")
        return {"json": json_path, "csv": csv_path}

    @classmethod
    def from_csv(cls, path: Union[str, Path], far: float = 0.005, threshold: Optional[float] = None) -> "DetectionReport":
        """Rebuild a report from its per-image CSV."""
        frame = pd.read_csv(path)
        rows = [
            ScoreRow(
                id=str(item["path"]),
                score=float(item["score"]),
                argmax=int(item["argmax"]),
                label=None if pd.isna(item["label"]) else int(item["label"]),
                template_index=int(item["template_index"]),
            )
            for item in frame.to_dict(orient="records")
        ]
        return cls(rows=rows, far=far).recompute(threshold)


class DetectionCollector:
    """
    Collects scored rows, PSNR values and scoring time during evaluation.
    Timing is logged, never written into the report.

    Usage:
        collector = DetectionCollector(far=0.005, config_hash=cfg.config_hash())
        collector.start()
        rows = score_dataset(...)
        collector.stop()
        for row in rows:
            collector.record(row)
        report = collector.calculate()
    """

    def __init__(self, far: float = 0.005, config_hash: str = ""):
        self.far = far
        self.config_hash = config_hash
        self.rows: List[ScoreRow] = []
        self.psnr_values: List[float] = []
        self.start_time: Optional[float] = None
        self.end_time: Optional[float] = None

    def start(self) -> None:
        """Mark the start of scoring."""
        self.start_time = time.perf_counter()

    def stop(self) -> None:
        """Mark the end of scoring."""
        self.end_time = time.perf_counter()

    @property
    def elapsed(self) -> Optional[float]:
        """Seconds between start and stop, None until both are marked."""
        if self.start_time is None or self.end_time is None:
            return None
        return self.end_time - self.start_time

    def record(self, row: ScoreRow) -> None:
        self.rows.append(row)

    def record_psnr(self, value: float) -> None:
        self.psnr_values.append(value)

    def calculate(self, threshold: Optional[float] = None) -> DetectionReport:
        """
        Build the report.

        Args:
            threshold: Fixed threshold instead of FAR calibration
        """
        report = DetectionReport(rows=list(self.rows), far=self.far, config_hash=self.config_hash)
        report.recompute(threshold)

        finite = [value for value in self.psnr_values if math.isfinite(value)]
        if finite:
            report.psnr_mean = float(np.mean(finite))
        elif self.psnr_values:
            report.psnr_mean = math.inf
        return report
