"""
Residual convolutional manipulator.
"""

import math

import torch
import torch.nn as nn
import torch.nn.functional as F

from .base import BaseManipulator

CHANNELS = (3, 8, 8, 3)
BIAS_STD = 0.1


class FixedConvManipulator(BaseManipulator):
    """
    x + tanh(conv3(relu(conv2(relu(conv1(x)))))) with frozen random 3x3
    convolutions 3 -> 8 -> 8 -> 3.

    Options:
        weight_scale: Multiplier on the random weights and biases; 0 gives
            the identity.
    """

    name = "fixed_conv"
    display_name = "Fixed residual convolution"

    def _build(self, generator: torch.Generator, weight_scale: float = 1.0, **options) -> None:
        layers = []
        for c_in, c_out in zip(CHANNELS[:-1], CHANNELS[1:]):
            conv = nn.Conv2d(c_in, c_out, kernel_size=3, padding=1)
            fan_in = c_in * 9
            conv.weight.copy_(
                torch.randn(conv.weight.shape, generator=generator) * math.sqrt(2.0 / fan_in) * weight_scale
            )
            conv.bias.copy_(torch.randn(conv.bias.shape, generator=generator) * BIAS_STD * weight_scale)
            layers.append(conv)
        self.convs = nn.ModuleList(layers)

    def _transform(self, images: torch.Tensor) -> torch.Tensor:
        hidden = F.relu(self.convs[0](images))
        hidden = F.relu(self.convs[1](hidden))
        return images + torch.tanh(self.convs[2](hidden))
