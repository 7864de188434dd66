"""
Shared domain types and tensor conventions.

Images are torch tensors in channel-first layout, ``(3, H, W)`` for one image
or ``(B, 3, H, W)`` for a batch, real-valued with nominal range [0, 1].
Templates are single-channel planes ``(H, W)``; a set of n templates is an
``(n, H, W)`` tensor.
"""

import math
from dataclasses import dataclass, asdict
from typing import Any, Dict, Optional

import torch

from .errors import ShapeError


IMAGE_SIDE = 128
IMAGE_CHANNELS = 3

LOSS_NAMES = ("J_m", "J_r", "J_c", "J_s", "J_p")


@dataclass(frozen=True)
class LossWeights:
    """
    Weights of the five template-learning losses.

    Defaults follow the reference training setup.
    """
    lambda1: float = 100.0   # J_m magnitude
    lambda2: float = 30.0    # J_r recovery
    lambda3: float = 5.0     # J_c content independence
    lambda4: float = 0.003   # J_s separation
    lambda5: float = 10.0    # J_p pair-wise set distribution

    def __post_init__(self):
        for name, value in self.to_dict().items():
            if not math.isfinite(value) or value < 0:
                raise ValueError(f"Loss weight {name} must be finite and >= 0, got {value}")

    def to_dict(self) -> Dict[str, float]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "LossWeights":
        return cls(**{k: float(v) for k, v in data.items()})

    def for_loss(self, loss_name: str) -> float:
        return getattr(self, _weight_field(loss_name))

    def without(self, *loss_names: str) -> "LossWeights":
        """Return a copy with the named losses weighted by zero."""
        values = self.to_dict()
        for name in loss_names:
            values[_weight_field(name)] = 0.0
        return LossWeights(**values)


def _weight_field(loss_name: str) -> str:
    normalized = loss_name.strip()
    for index, name in enumerate(LOSS_NAMES, start=1):
        if normalized.lower() == name.lower():
            return f"lambda{index}"
    raise ValueError(f"Unknown loss: {loss_name}. Available: {', '.join(LOSS_NAMES)}")


@dataclass(frozen=True)
class EncryptConfig:
    """Template strength and export behavior for encryption."""
    strength: float = 0.30
    clamp_on_export: bool = False

    def __post_init__(self):
        if not 0.0 <= self.strength <= 1.0:
            raise ValueError(f"Template strength must be in [0, 1], got {self.strength}")


@dataclass(frozen=True)
class FrequencyFilter:
    """Side length k of the centered low-pass window of the spectrum."""
    k: int = 50

    def __post_init__(self):
        if self.k < 1:
            raise ValueError(f"Low-pass window must be >= 1, got {self.k}")

    def check_side(self, side: int) -> None:
        if self.k > side:
            raise ShapeError(f"Low-pass window {self.k} exceeds template side {side}")


def check_image(image: torch.Tensor, side: Optional[int] = IMAGE_SIDE) -> None:
    """
    Validate an image or image batch.

    Args:
        image: Tensor of shape (3, H, W) or (B, 3, H, W)
        side: Required H = W, or None to accept any square size

    Raises:
        ShapeError: On wrong rank, channel count, size or non-finite values
    """
    if image.dim() not in (3, 4):
        raise ShapeError(f"Expected (3, H, W) or (B, 3, H, W) image, got shape {tuple(image.shape)}")
    channels, height, width = image.shape[-3:]
    if channels != IMAGE_CHANNELS:
        raise ShapeError(f"Expected {IMAGE_CHANNELS} channels, got {channels}")
    if height != width:
        raise ShapeError(f"Expected square image, got {height}x{width}")
    if side is not None and height != side:
        raise ShapeError(f"Expected {side}x{side} image, got {height}x{width}")
    if not torch.isfinite(image).all():
        raise ShapeError("Image contains non-finite values")


def check_plane(plane: torch.Tensor, side: Optional[int] = None) -> None:
    """Validate a template plane (H, W) or a stack of planes (..., H, W)."""
    if plane.dim() < 2:
        raise ShapeError(f"Expected (..., H, W) plane, got shape {tuple(plane.shape)}")
    height, width = plane.shape[-2:]
    if height != width:
        raise ShapeError(f"Expected square plane, got {height}x{width}")
    if side is not None and height != side:
        raise ShapeError(f"Expected {side}x{side} plane, got {height}x{width}")
