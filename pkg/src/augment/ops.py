"""
Image-editing augmentations applied after template addition.

Every op has the signature ``op(image, rng, p=0.5, **params)`` and works on a
single image (3, H, W) or a batch (B, 3, H, W); one set of random draws is
shared by the whole tensor. The skip branch returns the input unchanged.
Explicit params (``sigma``, ``quality``, ...) replace the random draws.
"""

import io
import logging
import math
from typing import Callable, Dict, Optional, Sequence

import numpy as np
import torch
import torch.nn.functional as F
from PIL import Image

from ..core.errors import CodecError, ShapeError
from ..core.rng import RngStream

logger = logging.getLogger(__name__)

SIGMA_RANGE = (0.0, 3.0)
QUALITY_RANGE = (30, 100)
MAX_CROP = 30
NOISE_STD = 1.0 / 255.0


def _batched(image: torch.Tensor) -> torch.Tensor:
    return image.unsqueeze(0) if image.dim() == 3 else image


def _unbatched(result: torch.Tensor, like: torch.Tensor) -> torch.Tensor:
    return result.squeeze(0) if like.dim() == 3 else result


def _applies(rng: RngStream, p: float) -> bool:
    return rng.random() < p


def gaussian_kernel_2d(sigma: float, dtype: torch.dtype = torch.float32) -> torch.Tensor:
    """Normalized (2r + 1)^2 kernel with r = ceil(3 sigma)."""
    radius = int(math.ceil(3.0 * sigma))
    x = torch.arange(-radius, radius + 1, dtype=dtype)
    kernel_1d = torch.exp(-0.5 * (x / sigma) ** 2)
    kernel_1d = kernel_1d / kernel_1d.sum()
    return torch.outer(kernel_1d, kernel_1d)


def blur(image: torch.Tensor, sigma: float) -> torch.Tensor:
    """Gaussian blur with reflective padding; sigma 0 is the identity."""
    if sigma <= 0:
        return image
    kernel = gaussian_kernel_2d(sigma, dtype=image.dtype)
    radius = kernel.shape[-1] // 2
    if radius >= min(image.shape[-2:]):
        raise ShapeError(
            f"Blur sigma {sigma:g} needs a kernel radius of {radius} px, "
            f"too large for a {image.shape[-2]}x{image.shape[-1]} image"
        )
    batch = _batched(image)
    channels = batch.shape[1]
    weight = kernel.view(1, 1, *kernel.shape).repeat(channels, 1, 1, 1)
    padded = F.pad(batch, [radius] * 4, mode="reflect")
    return _unbatched(F.conv2d(padded, weight, groups=channels), image)


def gaussian_blur(image: torch.Tensor, rng: RngStream, p: float = 0.5, sigma: Optional[float] = None) -> torch.Tensor:
    """With probability p blur with sigma ~ U[0, 3]."""
    if not _applies(rng, p):
        return image
    if sigma is None:
        sigma = float(rng.uniform((), *SIGMA_RANGE))
    return blur(image, sigma)


def _jpeg_round_trip(image: torch.Tensor, quality: int) -> torch.Tensor:
    """Encode and decode one (3, H, W) image through the JPEG codec."""
    pixels = image.detach().cpu().to(torch.float64).numpy()
    pixels = np.clip(np.rint(pixels * 255.0), 0, 255).astype(np.uint8).transpose(1, 2, 0)
    try:
        buffer = io.BytesIO()
        Image.fromarray(pixels).save(buffer, format="JPEG", quality=int(quality))
        buffer.seek(0)
        decoded = np.asarray(Image.open(buffer).convert("RGB"), dtype=np.float32) / 255.0
    except (OSError, ValueError) as e:
        raise CodecError(f"JPEG round trip failed at quality {quality}: {e}") from e
    return torch.from_numpy(decoded.transpose(2, 0, 1).copy()).to(image.dtype)


def jpeg(image: torch.Tensor, quality: int) -> torch.Tensor:
    """
    JPEG round trip with a straight-through gradient.

    The forward value is the decoded image; the backward pass treats the
    codec as the identity.
    """
    batch = _batched(image)
    decoded = torch.stack([_jpeg_round_trip(item, quality) for item in batch]).to(batch.device)
    result = batch + (decoded - batch).detach()
    return _unbatched(result, image)


def jpeg_compress(image: torch.Tensor, rng: RngStream, p: float = 0.5, quality: Optional[int] = None) -> torch.Tensor:
    """With probability p round-trip through JPEG at quality ~ U{30..100}."""
    if not _applies(rng, p):
        return image
    if quality is None:
        quality = rng.integers(QUALITY_RANGE[0], QUALITY_RANGE[1] + 1)
    return jpeg(image, quality)


def blur_jpeg(image: torch.Tensor, rng: RngStream, p: float = 0.5) -> torch.Tensor:
    """Blur with probability p, then JPEG with probability p, drawn independently."""
    return jpeg_compress(gaussian_blur(image, rng, p=p), rng, p=p)


def _resize(image: torch.Tensor, side: int) -> torch.Tensor:
    batch = _batched(image)
    resized = F.interpolate(batch, size=(side, side), mode="bilinear", align_corners=False)
    return _unbatched(resized, image)


def resize_mix(image: torch.Tensor, rng: RngStream, p: float = 0.5, scale: int = 2) -> torch.Tensor:
    """With probability p upsample bilinearly by ``scale`` and resize back."""
    if not _applies(rng, p):
        return image
    side = image.shape[-1]
    return _resize(_resize(image, side * scale), side)


def crop(image: torch.Tensor, top: int, bottom: int, left: int, right: int) -> torch.Tensor:
    """Remove pixel rows and columns from each side, then resize back."""
    if top == bottom == left == right == 0:
        return image
    height, width = image.shape[-2:]
    if top + bottom >= height or left + right >= width or min(top, bottom, left, right) < 0:
        raise ShapeError(f"Crop ({top}, {bottom}, {left}, {right}) leaves no pixels of a {height}x{width} image")
    cropped = image[..., top:height - bottom, left:width - right]
    return _resize(cropped, width)


def random_crop(
    image: torch.Tensor,
    rng: RngStream,
    p: float = 0.5,
    max_crop: int = MAX_CROP,
    amounts: Optional[Sequence[int]] = None,
) -> torch.Tensor:
    """
    Independently per side (top, bottom, left, right) with probability p,
    remove U{0..max_crop} pixels, then bilinearly resize back. On images
    smaller than 2 * max_crop + 1 the per-side amount is capped at
    (side - 1) // 2.
    """
    if amounts is None:
        max_crop = min(max_crop, (min(image.shape[-2:]) - 1) // 2)
        amounts = []
        for _ in range(4):
            applied = _applies(rng, p)
            amount = rng.integers(0, max_crop + 1)
            amounts.append(amount if applied else 0)
    top, bottom, left, right = (int(a) for a in amounts)
    return crop(image, top, bottom, left, right)


def gaussian_noise(image: torch.Tensor, rng: RngStream, p: float = 0.5, std: float = NOISE_STD) -> torch.Tensor:
    """With probability p add i.i.d. N(0, 1) noise in 8-bit units."""
    if not _applies(rng, p):
        return image
    noise = torch.from_numpy(rng.normal(tuple(image.shape), 0.0, std)).to(image.dtype)
    return image + noise.to(image.device)


AugmentationOp = Callable[..., torch.Tensor]

# Registry of available augmentations
AUGMENTATIONS: Dict[str, AugmentationOp] = {
    "gaussian_blur": gaussian_blur,
    "jpeg": jpeg_compress,
    "blur_jpeg": blur_jpeg,
    "resize_mix": resize_mix,
    "random_crop": random_crop,
    "gaussian_noise": gaussian_noise,
}


def get_augmentation(name: str) -> AugmentationOp:
    """
    Get an augmentation op by name.

    Raises:
        ValueError: If the augmentation is not found
    """
    op = AUGMENTATIONS.get(name.lower())
    if not op:
        available = ", ".join(AUGMENTATIONS.keys())
        raise ValueError(f"Unknown augmentation: {name}. Available: {available}")
    return op
