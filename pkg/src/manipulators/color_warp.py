"""
Color transform plus smooth geometric warp.
"""

import torch
import torch.nn.functional as F

from .base import BaseManipulator

COLOR_JITTER = 0.1
MAX_DISPLACEMENT = 3.0
FIELD_GRID = 4


class ColorWarpManipulator(BaseManipulator):
    """
    Global 3x3 color matrix near identity followed by a smooth coordinate
    warp sampled bilinearly.

    Options:
        color_jitter: Max absolute deviation of the matrix from identity
        max_displacement: Largest displacement vector length in pixels
    """

    name = "color_warp"
    display_name = "Color matrix and smooth warp"

    def _build(
        self,
        generator: torch.Generator,
        color_jitter: float = COLOR_JITTER,
        max_displacement: float = MAX_DISPLACEMENT,
        **options,
    ) -> None:
        side = self.image_side
        jitter = (torch.rand(3, 3, generator=generator) * 2.0 - 1.0) * color_jitter
        self.register_buffer("color_matrix", torch.eye(3) + jitter)

        coarse = torch.rand(1, 2, FIELD_GRID, FIELD_GRID, generator=generator) * 2.0 - 1.0
        field = F.interpolate(coarse, size=(side, side), mode="bilinear", align_corners=True)
        # Scale by the longest displacement vector, not per component
        peak = field.norm(dim=1).max()
        if peak > 0:
            field = field / peak * max_displacement
        else:
            field = field * 0.0
        # Pixel offsets -> normalized grid offsets (align_corners=True)
        offsets = field.permute(0, 2, 3, 1) * (2.0 / max(side - 1, 1))

        ys, xs = torch.meshgrid(
            torch.linspace(-1.0, 1.0, side),
            torch.linspace(-1.0, 1.0, side),
            indexing="ij",
        )
        base_grid = torch.stack([xs, ys], dim=-1).unsqueeze(0)
        self.register_buffer("grid", base_grid + offsets)
        self.warp_enabled = bool(max_displacement > 0)

    def _transform(self, images: torch.Tensor) -> torch.Tensor:
        colored = torch.einsum("ck,bkhw->bchw", self.color_matrix.to(images.dtype), images)
        if not self.warp_enabled:
            return colored
        grid = self.grid.to(images.dtype).expand(images.shape[0], -1, -1, -1)
        return F.grid_sample(colored, grid, mode="bilinear", padding_mode="border", align_corners=True)
