"""
Image-editing augmentations and recipes.
"""

from .ops import (
    AUGMENTATIONS,
    blur,
    jpeg,
    crop,
    gaussian_blur,
    jpeg_compress,
    blur_jpeg,
    resize_mix,
    random_crop,
    gaussian_noise,
    get_augmentation,
)
from .pipeline import AugmentationStep, AugmentationPipeline, RECIPES, get_recipe

__all__ = [
    "AUGMENTATIONS",
    "blur",
    "jpeg",
    "crop",
    "gaussian_blur",
    "jpeg_compress",
    "blur_jpeg",
    "resize_mix",
    "random_crop",
    "gaussian_noise",
    "get_augmentation",
    "AugmentationStep",
    "AugmentationPipeline",
    "RECIPES",
    "get_recipe",
]
