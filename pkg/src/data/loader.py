"""
Image I/O and folder corpora.
Supports PNG and JPEG files, flat or split into real/ and fake/ folders.
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Iterator, List, Optional, Union

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image

from ..core.errors import EmptyCorpusError
from ..core.types import IMAGE_SIDE

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")
REAL_DIR = "real"
FAKE_DIR = "fake"


@dataclass
class ImageRecord:
    """
    One corpus image.

    Attributes:
        id: Identifier, the file path for folder corpora
        image: Tensor (3, H, W) in [0, 1]
        label: 1 for real, 0 for fake, None when unlabelled
        metadata: Additional metadata
    """
    id: str
    image: torch.Tensor
    label: Optional[int] = None
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary (without pixel data)."""
        return {"id": self.id, "label": self.label, "metadata": self.metadata}


class ImageCorpus:
    """
    Ordered collection of images.

    Example:
        corpus = FolderLoader("photos").load()
        batch = corpus.stack([0, 1, 2, 3])
    """

    def __init__(self, records: List[ImageRecord], name: str = ""):
        self.records = list(records)
        self.name = name

    def __len__(self) -> int:
        return len(self.records)

    def __getitem__(self, index: int) -> ImageRecord:
        return self.records[index]

    def __iter__(self) -> Iterator[ImageRecord]:
        return iter(self.records)

    @property
    def ids(self) -> List[str]:
        return [record.id for record in self.records]

    @property
    def labels(self) -> List[Optional[int]]:
        return [record.label for record in self.records]

    def is_labelled(self) -> bool:
        return bool(self.records) and all(record.label is not None for record in self.records)

    def images(self) -> torch.Tensor:
        """All images stacked as (N, 3, H, W)."""
        self.require_nonempty()
        return torch.stack([record.image for record in self.records])

    def stack(self, indices) -> torch.Tensor:
        """Images at ``indices`` stacked as (B, 3, H, W)."""
        return torch.stack([self.records[int(i)].image for i in indices])

    def require_nonempty(self) -> None:
        if not self.records:
            raise EmptyCorpusError(f"Corpus '{self.name}' contains no images")

    def __repr__(self) -> str:
        return f"<ImageCorpus(name={self.name}, size={len(self)})>"


def resize_image(image: torch.Tensor, side: int = IMAGE_SIDE) -> torch.Tensor:
    """Bilinear resize of (3, H, W) to (3, side, side)."""
    if tuple(image.shape[-2:]) == (side, side):
        return image
    resized = F.interpolate(image.unsqueeze(0), size=(side, side), mode="bilinear", align_corners=False)
    return resized.squeeze(0)


def load_image(path: Union[str, Path], side: Optional[int] = IMAGE_SIDE) -> torch.Tensor:
    """
    Decode an image file to a float tensor in [0, 1].

    Args:
        path: PNG or JPEG file
        side: Resize target, or None to keep the file's size

    Returns:
        Tensor (3, H, W)
    """
    with Image.open(path) as img:
        pixels = np.asarray(img.convert("RGB"), dtype=np.float32) / 255.0
    image = torch.from_numpy(pixels.transpose(2, 0, 1).copy())
    return resize_image(image, side) if side is not None else image


def to_uint8(image: torch.Tensor) -> np.ndarray:
    """Round-then-clamp to 8-bit, HWC layout."""
    pixels = image.detach().cpu().to(torch.float64).numpy()
    return np.clip(np.rint(pixels * 255.0), 0, 255).astype(np.uint8).transpose(1, 2, 0)


def save_image(image: torch.Tensor, path: Union[str, Path]) -> Path:
    """Encode a (3, H, W) tensor; the format follows the file suffix."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.fromarray(to_uint8(image)).save(path)
    return path


def list_image_files(folder: Union[str, Path]) -> List[Path]:
    """Image files directly inside ``folder``, sorted by name."""
    folder = Path(folder)
    return sorted(p for p in folder.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


class FolderLoader:
    """
    Load images from a folder.

    Supported layouts:
        - labelled: ``real/`` and ``fake/`` subfolders (labels 1 and 0)
        - flat: images directly inside the folder, unlabelled

    Example:
        loader = FolderLoader("eval_set")
        corpus = loader.load(limit=200)
    """

    def __init__(self, folder: Union[str, Path], side: int = IMAGE_SIDE):
        """
        Initialize folder loader.

        Args:
            folder: Folder to read
            side: Images are resized to side x side at ingestion
        """
        self.folder = Path(folder)
        self.side = side

        if not self.folder.is_dir():
            raise FileNotFoundError(f"Image folder not found: {folder}")

        self.layout = self._detect_layout()
        logger.info(f"FolderLoader initialized: {folder} (layout: {self.layout})")

    def _detect_layout(self) -> str:
        if (self.folder / REAL_DIR).is_dir() or (self.folder / FAKE_DIR).is_dir():
            return "labelled"
        return "flat"

    def _files(self) -> List[tuple]:
        if self.layout == "flat":
            return [(path, None) for path in list_image_files(self.folder)]
        files = []
        for subdir, label in ((REAL_DIR, 1), (FAKE_DIR, 0)):
            if (self.folder / subdir).is_dir():
                files.extend((path, label) for path in list_image_files(self.folder / subdir))
        return files

    def load(self, limit: Optional[int] = None) -> ImageCorpus:
        """
        Load the folder.

        Args:
            limit: Maximum number of images to load

        Returns:
            ImageCorpus in sorted file order (real before fake)

        Raises:
            EmptyCorpusError: If no image files are found
        """
        files = self._files()
        if limit:
            files = files[:limit]
        if not files:
            raise EmptyCorpusError(f"No images found in {self.folder}")

        records = [
            ImageRecord(id=str(path), image=load_image(path, self.side), label=label)
            for path, label in files
        ]
        logger.info(f"Loaded {len(records)} images from {self.folder}")
        return ImageCorpus(records, name=self.folder.name)


def load_images(path: Union[str, Path], side: int = IMAGE_SIDE) -> ImageCorpus:
    """Load a single image file or a folder as a corpus."""
    path = Path(path)
    if path.is_file():
        return ImageCorpus([ImageRecord(id=str(path), image=load_image(path, side))], name=path.stem)
    return FolderLoader(path, side=side).load()
