"""
Process-level configuration for Template Forensics.
Loads settings from environment variables and .env file.

Experiment knobs (set size, strength, loss weights, ...) live in JSON
configs parsed by ``src.training.TrainConfig``; this module only holds
where things are written and how much parallelism to use.
"""

import os
from pathlib import Path

from dotenv import load_dotenv

# Load .env file from project root
PROJECT_ROOT = Path(__file__).parent.parent
load_dotenv(PROJECT_ROOT / ".env")


def _resolve(path: str) -> Path:
    candidate = Path(path)
    return candidate if candidate.is_absolute() else PROJECT_ROOT / candidate


class Config:
    """Central configuration management."""

    # ==========================================================================
    # Output locations
    # ==========================================================================
    OUTPUT_ROOT: Path = _resolve(os.getenv("TEMPLATE_OUTPUT_ROOT", "output"))
    REPORT_DIR: Path = _resolve(os.getenv("TEMPLATE_REPORT_DIR", "reports"))

    # ==========================================================================
    # Runtime
    # ==========================================================================
    NUM_WORKERS: int = int(os.getenv("NUM_WORKERS", "4"))
    TORCH_THREADS: int = int(os.getenv("TORCH_THREADS", "0"))

    # ==========================================================================
    # Detection defaults
    # ==========================================================================
    DEFAULT_FAR: float = float(os.getenv("DEFAULT_FAR", "0.005"))
    IMAGE_SIDE: int = int(os.getenv("IMAGE_SIDE", "128"))

    @classmethod
    def apply_torch_threads(cls) -> None:
        """Pin torch's intra-op thread count when TORCH_THREADS is set."""
        if cls.TORCH_THREADS > 0:
            import torch

            torch.set_num_threads(cls.TORCH_THREADS)

    @classmethod
    def ensure_directories(cls):
        """Create output directories if they don't exist."""
        cls.OUTPUT_ROOT.mkdir(parents=True, exist_ok=True)
        cls.REPORT_DIR.mkdir(parents=True, exist_ok=True)
