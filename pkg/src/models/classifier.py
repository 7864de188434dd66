"""
Passive classifier baseline: image -> two logits.
"""

from typing import Any, Dict

import torch
import torch.nn as nn

from ..core.types import IMAGE_SIDE, check_image
from .encoder import set_mode

CHANNEL_PLAN = (3, 16, 16, 32, 32, 64, 64, 128, 128)
STRIDED_BLOCKS = (2, 4, 6, 8)
HIDDEN_FEATURES = (64, 32)


class PassiveClassifier(nn.Module):
    """
    Eight [3x3 conv, batch norm, ReLU] blocks, global average pooling and a
    128 -> 64 -> 32 -> 2 fully connected head.

    Logit index 1 is the encrypted-real class, index 0 the manipulated class.
    """

    def __init__(self, image_side: int = IMAGE_SIDE):
        super().__init__()
        self.image_side = image_side

        layers = []
        for block, (c_in, c_out) in enumerate(zip(CHANNEL_PLAN[:-1], CHANNEL_PLAN[1:]), start=1):
            stride = 2 if block in STRIDED_BLOCKS else 1
            layers.extend([
                nn.Conv2d(c_in, c_out, kernel_size=3, stride=stride, padding=1),
                nn.BatchNorm2d(c_out),
                nn.ReLU(),
            ])
        self.features = nn.Sequential(*layers)
        self.pool = nn.AdaptiveAvgPool2d(1)

        hidden_1, hidden_2 = HIDDEN_FEATURES
        self.head = nn.Sequential(
            nn.Linear(CHANNEL_PLAN[-1], hidden_1),
            nn.ReLU(),
            nn.Linear(hidden_1, hidden_2),
            nn.ReLU(),
            nn.Linear(hidden_2, 2),
        )

    def forward(self, images: torch.Tensor) -> torch.Tensor:
        """(B, 3, H, W) -> (B, 2)."""
        return self.head(self.pool(self.features(images)).flatten(1))

    def descriptor(self) -> Dict[str, Any]:
        return {
            "kind": "passive_classifier",
            "image_side": self.image_side,
            "channel_plan": list(CHANNEL_PLAN),
            "hidden_features": list(HIDDEN_FEATURES),
            "parameter_count": sum(p.numel() for p in self.parameters()),
        }


def classifier_forward(classifier: PassiveClassifier, image: torch.Tensor, mode: str = "eval") -> torch.Tensor:
    """
    Classify an image or batch.

    Returns:
        (2,) logits for one image, (B, 2) for a batch
    """
    check_image(image, side=classifier.image_side)
    set_mode(classifier, mode)

    if image.dim() == 3:
        return classifier(image.unsqueeze(0)).squeeze(0)
    return classifier(image)


def real_probability(logits: torch.Tensor) -> torch.Tensor:
    """Softmax probability of the encrypted-real class, used as detection score."""
    return torch.softmax(logits, dim=-1)[..., 1]
