"""
Ordered augmentation recipes built from config entries.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import torch

from ..core.errors import ConfigurationError
from ..core.rng import RngStream
from .ops import get_augmentation

logger = logging.getLogger(__name__)


@dataclass
class AugmentationStep:
    """One recipe entry: op name, application probability and fixed params."""
    name: str
    probability: float = 0.5
    params: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 <= self.probability <= 1.0:
            raise ConfigurationError(
                f"Augmentation '{self.name}' probability must be in [0, 1], got {self.probability}"
            )
        try:
            get_augmentation(self.name)
        except ValueError as e:
            raise ConfigurationError(str(e)) from e

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "probability": self.probability, "params": dict(self.params)}


class AugmentationPipeline:
    """
    Apply an ordered list of augmentations to encrypted images.

    Batches are augmented per item, in order, from one stream, so the result
    replays bit-identically from (seed, counter).

    Example:
        pipeline = AugmentationPipeline.from_recipe([
            {"name": "gaussian_blur", "probability": 0.5},
            {"name": "jpeg", "probability": 0.5},
        ])
        augmented = pipeline(encrypted, rng)
    """

    def __init__(self, steps: Optional[List[AugmentationStep]] = None):
        self.steps = list(steps or [])

    @classmethod
    def from_recipe(cls, recipe: Optional[List[Dict[str, Any]]]) -> "AugmentationPipeline":
        steps = []
        for entry in recipe or []:
            if "name" not in entry:
                raise ConfigurationError(f"Augmentation entry missing 'name': {entry}")
            steps.append(AugmentationStep(
                name=entry["name"],
                probability=float(entry.get("probability", 0.5)),
                params=dict(entry.get("params", {})),
            ))
        return cls(steps)

    def to_recipe(self) -> List[Dict[str, Any]]:
        return [step.to_dict() for step in self.steps]

    def _apply_one(self, image: torch.Tensor, rng: RngStream) -> torch.Tensor:
        for step in self.steps:
            image = get_augmentation(step.name)(image, rng, p=step.probability, **step.params)
        return image

    def __call__(self, image: torch.Tensor, rng: RngStream) -> torch.Tensor:
        if not self.steps:
            return image
        if image.dim() == 3:
            return self._apply_one(image, rng)
        return torch.stack([self._apply_one(item, rng) for item in image])

    def __bool__(self) -> bool:
        return bool(self.steps)

    def __len__(self) -> int:
        return len(self.steps)

    def __repr__(self) -> str:
        names = ", ".join(step.name for step in self.steps)
        return f"<AugmentationPipeline({names})>"


# Robustness recipes, one per editing operation
RECIPES: Dict[str, List[Dict[str, Any]]] = {
    "blur": [{"name": "gaussian_blur", "probability": 0.5}],
    "jpeg": [{"name": "jpeg", "probability": 0.5}],
    "blur_jpeg_0.1": [{"name": "blur_jpeg", "probability": 0.1}],
    "blur_jpeg_0.5": [{"name": "blur_jpeg", "probability": 0.5}],
    "resize": [{"name": "resize_mix", "probability": 0.5}],
    "crop": [{"name": "random_crop", "probability": 0.5}],
    "noise": [{"name": "gaussian_noise", "probability": 0.5}],
}


def get_recipe(name: str) -> List[Dict[str, Any]]:
    """Get a named robustness recipe."""
    recipe = RECIPES.get(name)
    if recipe is None:
        available = ", ".join(RECIPES.keys())
        raise ValueError(f"Unknown recipe: {name}. Available: {available}")
    return [dict(entry) for entry in recipe]
