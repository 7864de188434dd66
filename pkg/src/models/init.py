"""
Deterministic initialization of the encoder and classifier.
"""

import logging
import math

import torch
import torch.nn as nn

from ..core.rng import RngStream
from ..core.types import IMAGE_SIDE
from .classifier import PassiveClassifier
from .encoder import RecoveryEncoder

logger = logging.getLogger(__name__)


@torch.no_grad()
def initialize_parameters(module: nn.Module, rng: RngStream) -> nn.Module:
    """
    Fan-in scaled normal weights, zero biases, batch-norm scale 1 and shift 0.

    All draws come from one torch generator seeded by ``rng``, visiting
    layers in module order, so the result depends only on the seed.
    """
    generator = rng.torch_generator()
    for layer in module.modules():
        if isinstance(layer, (nn.Conv2d, nn.Linear)):
            fan_in = layer.weight[0].numel()
            values = torch.randn(layer.weight.shape, generator=generator, dtype=torch.float32)
            layer.weight.copy_(values * math.sqrt(2.0 / fan_in))
            if layer.bias is not None:
                layer.bias.zero_()
        elif isinstance(layer, nn.BatchNorm2d):
            layer.reset_running_stats()
            layer.weight.fill_(1.0)
            layer.bias.zero_()
    return module


def init_encoder(rng: RngStream, image_side: int = IMAGE_SIDE) -> RecoveryEncoder:
    """Create a recovery encoder with seeded weights."""
    encoder = initialize_parameters(RecoveryEncoder(image_side=image_side), rng)
    logger.debug(f"Initialized recovery encoder (seed={rng.seed}, side={image_side})")
    return encoder


def init_classifier(rng: RngStream, image_side: int = IMAGE_SIDE) -> PassiveClassifier:
    """Create a passive classifier with seeded weights."""
    classifier = initialize_parameters(PassiveClassifier(image_side=image_side), rng)
    logger.debug(f"Initialized passive classifier (seed={rng.seed}, side={image_side})")
    return classifier
