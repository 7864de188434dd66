"""
Training logs: one record per optimizer step plus per-epoch summaries.
"""

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Union

import pandas as pd

logger = logging.getLogger(__name__)


@dataclass
class TrainLog:
    """
    Replayable record of a training run.

    Step and epoch records carry no timestamps, so identical configs give
    identical logs; wall-clock time is kept separately.

    Attributes:
        config_hash: Hash of the TrainConfig
        variant: Variant tag (full, fixed_template, ...)
        steps: Per-step records (loss terms, total, detection objective)
        epochs: Per-epoch records (pairwise cosine mean, manipulator checksum)
        wall_clock_seconds: Total training time
    """
    config_hash: str
    variant: str = "full"
    steps: List[Dict[str, Any]] = field(default_factory=list)
    epochs: List[Dict[str, Any]] = field(default_factory=list)
    wall_clock_seconds: float = 0.0

    def __len__(self) -> int:
        return len(self.steps)

    def add_step(self, record: Dict[str, Any]) -> None:
        self.steps.append(record)

    def add_epoch(self, record: Dict[str, Any]) -> None:
        self.epochs.append(record)

    def epoch_means(self, key: str) -> List[float]:
        """Mean of a step field per epoch, in epoch order."""
        if not self.steps:
            return []
        frame = pd.DataFrame(self.steps)
        return frame.groupby("epoch", sort=True)[key].mean().tolist()

    def to_jsonl(self, path: Union[str, Path]) -> Path:
        """Write one JSON object per step."""
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            for record in self.steps:
                f.write(json.dumps({"config_hash": self.config_hash, "variant": self.variant, **record}, sort_keys=True))
                f.write("\n")
        logger.info(f"Training log written: {path} ({len(self.steps)} steps)")
        return path

    @classmethod
    def from_jsonl(cls, path: Union[str, Path]) -> "TrainLog":
        steps = []
        config_hash, variant = "", "full"
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                if not line.strip():
                    continue
                record = json.loads(line)
                config_hash = record.pop("config_hash", config_hash)
                variant = record.pop("variant", variant)
                steps.append(record)
        return cls(config_hash=config_hash, variant=variant, steps=steps)

    def summary(self) -> Dict[str, Any]:
        """Aggregate view, including wall-clock time."""
        return {
            "config_hash": self.config_hash,
            "variant": self.variant,
            "steps": len(self.steps),
            "epochs": self.epochs,
            "final_total": self.steps[-1]["total"] if self.steps else None,
            "wall_clock_seconds": self.wall_clock_seconds,
        }
