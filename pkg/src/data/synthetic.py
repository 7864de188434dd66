"""
Procedural corpus of textured composite images.

Each image is drawn from a stream derived from (seed, split, index), so any
image can be regenerated on its own and corpora do not depend on
generation order.
"""

import logging
from pathlib import Path
from typing import Optional, Union

import numpy as np
import torch

from ..core.rng import RngStream, make_rng
from ..core.types import IMAGE_SIDE
from .loader import FolderLoader, ImageCorpus, ImageRecord, save_image

logger = logging.getLogger(__name__)

SPLITS = {"train": 0, "test": 1}
NOISE_STD = 0.01


def _coordinates(side: int):
    axis = (np.arange(side, dtype=np.float64) + 0.5) / side
    return np.meshgrid(axis, axis, indexing="ij")


def generate_image(rng: RngStream, side: int = IMAGE_SIDE) -> torch.Tensor:
    """
    One composite: gradient background, rectangles, ellipses, an oriented
    sinusoidal texture and light noise.

    Returns:
        Tensor (3, side, side) in [0, 1]
    """
    ys, xs = _coordinates(side)

    colors = rng.uniform((2, 3))
    angle = float(rng.uniform((), 0.0, np.pi))
    ramp = xs * np.cos(angle) + ys * np.sin(angle)
    ramp = (ramp - ramp.min()) / max(ramp.max() - ramp.min(), 1e-12)
    image = colors[0][:, None, None] * (1.0 - ramp) + colors[1][:, None, None] * ramp

    for _ in range(rng.integers(1, 5)):
        top, left = rng.uniform(2, 0.0, 0.8)
        height, width = rng.uniform(2, 0.1, 0.5)
        color = rng.uniform(3)
        inside = (ys >= top) & (ys < top + height) & (xs >= left) & (xs < left + width)
        image[:, inside] = color[:, None]

    for _ in range(rng.integers(1, 4)):
        cy, cx = rng.uniform(2, 0.1, 0.9)
        ry, rx = rng.uniform(2, 0.05, 0.3)
        color = rng.uniform(3)
        inside = ((ys - cy) / ry) ** 2 + ((xs - cx) / rx) ** 2 <= 1.0
        image[:, inside] = color[:, None]

    amplitude = float(rng.uniform((), 0.02, 0.1))
    frequency = float(rng.uniform((), 2.0, 12.0))
    orientation = float(rng.uniform((), 0.0, np.pi))
    phase = float(rng.uniform((), 0.0, 2.0 * np.pi))
    wave = np.sin(2.0 * np.pi * frequency * (xs * np.cos(orientation) + ys * np.sin(orientation)) + phase)
    image = image + amplitude * wave[None]

    image = image + rng.normal((3, side, side), 0.0, NOISE_STD)
    return torch.from_numpy(np.clip(image, 0.0, 1.0).astype(np.float32))


class SyntheticCorpus:
    """
    Seeded procedural corpus.

    Example:
        train = SyntheticCorpus(seed=1).build("train", 500)
        test = SyntheticCorpus(seed=1).build("test", 200)
    """

    def __init__(self, seed: int, side: int = IMAGE_SIDE):
        self.seed = seed
        self.side = side
        self._root = make_rng(seed)

    def image(self, split: str, index: int) -> torch.Tensor:
        if split not in SPLITS:
            raise ValueError(f"Unknown split: {split}. Available: {', '.join(SPLITS)}")
        return generate_image(self._root.spawn(SPLITS[split], index), self.side)

    def build(self, split: str, size: int) -> ImageCorpus:
        """Generate ``size`` images of a split."""
        records = [
            ImageRecord(
                id=f"{split}_{index:05d}",
                image=self.image(split, index),
                label=1,
                metadata={"seed": self.seed, "split": split, "index": index},
            )
            for index in range(size)
        ]
        logger.info(f"Generated synthetic {split} corpus: {size} images (seed={self.seed})")
        return ImageCorpus(records, name=f"synthetic_{split}")


def create_corpus(
    output_dir: Union[str, Path],
    seed: int,
    size: int,
    split: str = "train",
    side: int = IMAGE_SIDE,
) -> Path:
    """
    Write a synthetic corpus as PNG files.

    Args:
        output_dir: Folder to write
        seed: Corpus seed
        size: Number of images
        split: Split to draw from

    Returns:
        Output folder
    """
    output_dir = Path(output_dir)
    corpus = SyntheticCorpus(seed, side=side).build(split, size)
    for record in corpus:
        save_image(record.image, output_dir / f"{record.id}.png")
    logger.info(f"Synthetic corpus written: {output_dir}")
    return output_dir


def load_or_generate(
    seed: int,
    split: str,
    size: int,
    folder: Optional[Union[str, Path]] = None,
    side: int = IMAGE_SIDE,
) -> ImageCorpus:
    """Load ``folder`` when given, else generate a synthetic split."""
    if folder:
        return FolderLoader(folder, side=side).load(limit=size)
    return SyntheticCorpus(seed, side=side).build(split, size)
