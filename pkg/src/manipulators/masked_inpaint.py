"""
Masked inpainting manipulator.
"""

import torch
import torch.nn.functional as F

from .base import BaseManipulator

MASK_SIZE = 32
KERNEL_SIZE = 5


class MaskedInpaintManipulator(BaseManipulator):
    """
    Zero a seeded square region, smooth the whole masked image with a frozen
    5x5 kernel and fill the region with the smoothed values:

        masked = x * (1 - M)
        y = masked + M * smooth(masked)

    Pixels outside the mask are returned unchanged.

    Options:
        mask_size: Side of the square region (clipped to half the image)
        centered: Place the region at the image center instead of a seeded
            position
    """

    name = "masked_inpaint"
    display_name = "Masked inpainting"

    def _build(
        self,
        generator: torch.Generator,
        mask_size: int = MASK_SIZE,
        centered: bool = False,
        **options,
    ) -> None:
        side = self.image_side
        size = max(1, min(int(mask_size), side // 2))

        if centered:
            top = left = (side - size) // 2
        else:
            top, left = torch.randint(0, side - size + 1, (2,), generator=generator).tolist()

        mask = torch.zeros(1, 1, side, side)
        mask[..., top:top + size, left:left + size] = 1.0
        self.register_buffer("mask", mask)
        self.mask_box = (int(top), int(left), int(size))

        # Positive weights summing to one per channel
        weights = torch.rand(3, 1, KERNEL_SIZE, KERNEL_SIZE, generator=generator) + 0.5
        weights = weights / weights.sum(dim=(-2, -1), keepdim=True)
        self.register_buffer("kernel", weights)

    def _transform(self, images: torch.Tensor) -> torch.Tensor:
        mask = self.mask.to(images.dtype)
        masked = images * (1.0 - mask)
        padded = F.pad(masked, [KERNEL_SIZE // 2] * 4, mode="reflect")
        smoothed = F.conv2d(padded, self.kernel.to(images.dtype), groups=3)
        return masked + mask * smoothed
