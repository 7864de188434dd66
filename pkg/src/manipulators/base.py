"""
Base interface for frozen image-to-image manipulators.
All manipulators must implement this interface.
"""

import hashlib
import logging
from abc import ABC, abstractmethod
from typing import Any, Dict

import torch
import torch.nn as nn

from ..core.rng import make_rng
from ..core.types import IMAGE_SIDE, check_image

logger = logging.getLogger(__name__)


class BaseManipulator(nn.Module, ABC):
    """
    Abstract base class for manipulators standing in for generative models.

    Parameters are generated from the seed at construction and frozen:
    gradients flow through ``manipulate`` to its input, never into the
    manipulator itself.

    Example:
        class MyManipulator(BaseManipulator):
            name = "mine"

            def _build(self, generator, **options):
                self.register_buffer("gain", torch.ones(1))

            def _transform(self, images):
                return images * self.gain
    """

    name: str = "base"
    display_name: str = "Base Manipulator"

    def __init__(self, seed: int, image_side: int = IMAGE_SIDE, **options):
        super().__init__()
        self.seed = seed
        self.image_side = image_side
        self.options = dict(options)

        generator = make_rng(seed).torch_generator()
        with torch.no_grad():
            self._build(generator, **options)
        self.requires_grad_(False)
        self.eval()

    @abstractmethod
    def _build(self, generator: torch.Generator, **options) -> None:
        """Create frozen parameters and buffers from a seeded generator."""
        pass

    @abstractmethod
    def _transform(self, images: torch.Tensor) -> torch.Tensor:
        """Apply the manipulation to a batch (B, 3, H, W)."""
        pass

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        return self._transform(images)

    def manipulate(self, image: torch.Tensor) -> torch.Tensor:
        """
        Manipulate one image (3, H, W) or a batch (B, 3, H, W).

        Returns:
            Tensor with the input's shape
        """
        check_image(image, side=self.image_side)
        if image.dim() == 3:
            return self._transform(image.unsqueeze(0)).squeeze(0)
        return self._transform(image)

    def checksum(self) -> str:
        """SHA-256 over all frozen parameters and buffers."""
        digest = hashlib.sha256()
        for name, tensor in self.state_dict().items():
            digest.update(name.encode("utf-8"))
            digest.update(tensor.detach().to(torch.float64).cpu().numpy().tobytes())
        return digest.hexdigest()

    def describe(self) -> Dict[str, Any]:
        """Serializable spec; parameters are regenerated from it, never stored."""
        return {"kind": self.name, "seed": self.seed, "options": dict(self.options)}

    def __repr__(self) -> str:
        return f"<{self.__class__.__name__}(name={self.name}, seed={self.seed})>"
