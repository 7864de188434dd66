"""
Recovery encoder: image -> template-shaped plane.
"""

import logging
from typing import Any, Dict

import torch
import torch.nn as nn

from ..core.types import IMAGE_SIDE, check_image

logger = logging.getLogger(__name__)

STEM_CHANNELS = (16, 32)
BLOCK_CHANNELS = 32
NUM_BLOCKS = 10


class RecoveryEncoder(nn.Module):
    """
    Shallow convolutional encoder producing S_R / S_F.

    Layout: two 3x3 stem convolutions (3 -> 16 -> 32, ReLU), ten blocks of
    [3x3 conv 32 -> 32, batch norm, ReLU], and a 1x1 head to one channel with
    no output activation. All convolutions keep spatial size.

    Example:
        encoder = init_encoder(make_rng(1))
        plane = encoder_forward(encoder, image, mode="eval")  # (128, 128)
    """

    def __init__(self, image_side: int = IMAGE_SIDE):
        super().__init__()
        self.image_side = image_side

        stem_in, stem_out = STEM_CHANNELS
        self.stem = nn.Sequential(
            nn.Conv2d(3, stem_in, kernel_size=3, padding=1),
            nn.ReLU(),
            nn.Conv2d(stem_in, stem_out, kernel_size=3, padding=1),
            nn.ReLU(),
        )
        blocks = []
        for _ in range(NUM_BLOCKS):
            blocks.extend([
                nn.Conv2d(BLOCK_CHANNELS, BLOCK_CHANNELS, kernel_size=3, padding=1),
                nn.BatchNorm2d(BLOCK_CHANNELS),
                nn.ReLU(),
            ])
        self.blocks = nn.Sequential(*blocks)
        self.head = nn.Conv2d(BLOCK_CHANNELS, 1, kernel_size=1)

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        """(B, 3, H, W) -> (B, H, W)."""
        return self.head(self.blocks(self.stem(images))).squeeze(1)

    def descriptor(self) -> Dict[str, Any]:
        """Architecture descriptor stored next to weights."""
        return {
            "kind": "recovery_encoder",
            "image_side": self.image_side,
            "stem_channels": list(STEM_CHANNELS),
            "block_channels": BLOCK_CHANNELS,
            "num_blocks": NUM_BLOCKS,
            "parameter_count": sum(p.numel() for p in self.parameters()),
        }


def set_mode(module: nn.Module, mode: str) -> None:
    if mode == "train":
        module.train()
    elif mode == "eval":
        module.eval()
    else:
        raise ValueError(f"Unknown mode: {mode}. Available: train, eval")


def encoder_forward(encoder: RecoveryEncoder, image: torch.Tensor, mode: str = "eval") -> torch.Tensor:
    """
    Recover a template plane from an image or batch.

    Batch norm uses batch statistics in train mode and running statistics in
    eval mode.

    Args:
        encoder: Recovery encoder
        image: (3, H, W) or (B, 3, H, W) with H = encoder.image_side
        mode: "train" or "eval"

    Returns:
        (H, W) for one image, (B, H, W) for a batch
    """
    check_image(image, side=encoder.image_side)
    set_mode(encoder, mode)

    if image.dim() == 3:
        return encoder(image.unsqueeze(0)).squeeze(0)
    return encoder(image)
