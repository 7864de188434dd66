"""
Template sets: creation, random selection, encryption and normalization.
"""

import hashlib
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Tuple, Union

import numpy as np
import torch

from ..core.errors import ShapeError
from ..core.rng import RngStream
from ..core.similarity import cosine
from ..core.types import EncryptConfig, check_image, check_plane

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


@dataclass(frozen=True, eq=False)
class TemplateSet:
    """
    An ordered set of n single-channel template planes.

    The planes are stored detached and copied on access; a trained set is
    never modified in place.

    Attributes:
        planes: Tensor (n, H, W)
        seed: Seed used at initialization
        version: File format version
    """
    planes: torch.Tensor
    seed: int = 0
    version: int = FORMAT_VERSION
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.planes.dim() != 3 or self.planes.shape[0] < 1:
            raise ShapeError(f"Template set must be (n, H, W) with n >= 1, got {tuple(self.planes.shape)}")
        check_plane(self.planes)
        if not torch.isfinite(self.planes).all():
            raise ValueError("Template set contains non-finite values")
        object.__setattr__(self, "planes", self.planes.detach().clone())

    @property
    def n(self) -> int:
        return int(self.planes.shape[0])

    @property
    def side(self) -> int:
        return int(self.planes.shape[-1])

    def template(self, index: int) -> torch.Tensor:
        """Copy of template ``index`` (0-based)."""
        if not 0 <= index < self.n:
            raise IndexError(f"Template index {index} out of range for set of size {self.n}")
        return self.planes[index].clone()

    def as_tensor(self, dtype: torch.dtype = torch.float32) -> torch.Tensor:
        """Copy of all planes, (n, H, W)."""
        return self.planes.to(dtype).clone()

    def checksum(self) -> str:
        """SHA-256 of the float32 little-endian payload."""
        payload = self.planes.to(torch.float32).numpy().astype("<f4").tobytes()
        return hashlib.sha256(payload).hexdigest()

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"<TemplateSet(n={self.n}, side={self.side}, seed={self.seed})>"


def _planes(templates: Union[TemplateSet, torch.Tensor]) -> torch.Tensor:
    if isinstance(templates, TemplateSet):
        return templates.planes
    return templates


def init_template_set(n: int, side: int, rng: RngStream) -> TemplateSet:
    """
    Initialize n planes with i.i.d. U[0, 1) pixels.

    Args:
        n: Number of templates (>= 1)
        side: Plane side length (>= 2)
        rng: Random stream; its seed is recorded on the set

    Returns:
        New TemplateSet
    """
    if n < 1:
        raise ValueError(f"Template set size must be >= 1, got {n}")
    if side < 2:
        raise ValueError(f"Template side must be >= 2, got {side}")

    values = rng.uniform((n, side, side)).astype(np.float32)
    logger.debug(f"Initialized template set: n={n}, side={side}, seed={rng.seed}")
    return TemplateSet(planes=torch.from_numpy(values), seed=rng.seed)


def select_template(
    templates: Union[TemplateSet, torch.Tensor],
    rng: RngStream,
) -> Tuple[int, torch.Tensor]:
    """
    Pick a template uniformly at random.

    Returns:
        Tuple of (0-based index, plane)
    """
    planes = _planes(templates)
    if planes.shape[0] == 0:
        raise ValueError("Cannot select from an empty template set")
    index = rng.integers(0, planes.shape[0])
    return index, planes[index]


def encrypt(image: torch.Tensor, template: torch.Tensor, cfg: EncryptConfig) -> torch.Tensor:
    """
    Add a template to an image: X + m * S, broadcast across channels.

    The result is clamped to [0, 1] only when ``cfg.clamp_on_export`` is set;
    inside the training graph the sum is left unclamped.

    Args:
        image: (3, H, W) or (B, 3, H, W)
        template: (H, W), or (B, H, W) with one plane per batch item
        cfg: Strength and export behavior

    Returns:
        Encrypted image with the input's shape
    """
    check_image(image, side=None)
    if template.shape[-2:] != image.shape[-2:]:
        raise ShapeError(
            f"Template {tuple(template.shape[-2:])} does not match image {tuple(image.shape[-2:])}"
        )
    if template.dim() == 3 and (image.dim() != 4 or template.shape[0] != image.shape[0]):
        raise ShapeError(
            f"Per-item templates {tuple(template.shape)} need a batch of {template.shape[0]} images"
        )
    if template.dim() not in (2, 3):
        raise ShapeError(f"Template must be (H, W) or (B, H, W), got {tuple(template.shape)}")

    encrypted = image + cfg.strength * template.unsqueeze(-3)
    if cfg.clamp_on_export:
        encrypted = encrypted.clamp(0.0, 1.0)
    return encrypted


def minmax_normalize(template: torch.Tensor) -> torch.Tensor:
    """
    N(S) = (S - min S) / (max S - min S) over the last two dimensions.

    Constant planes map to all zeros.
    """
    flat = template.flatten(-2)
    low = flat.min(dim=-1, keepdim=True).values
    high = flat.max(dim=-1, keepdim=True).values
    spread = high - low
    nonconstant = spread > 0
    safe = torch.where(nonconstant, spread, torch.ones_like(spread))
    normalized = torch.where(nonconstant, (flat - low) / safe, torch.zeros_like(flat))
    return normalized.view_as(template)


@dataclass
class PairwiseStats:
    """Normalized cosine for every pair i < j and their mean."""
    pairs: List[Tuple[int, int, float]]
    mean: float

    @property
    def values(self) -> List[float]:
        return [value for _, _, value in self.pairs]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "pairs": [{"i": i, "j": j, "cosine": value} for i, j, value in self.pairs],
            "mean": self.mean,
        }


def pairwise_normalized_cosines(planes: torch.Tensor) -> torch.Tensor:
    """Cos(N(S_i), N(S_j)) for i < j in row-major order, differentiable."""
    n = planes.shape[0]
    if n < 2:
        return planes.new_zeros(0)
    normalized = minmax_normalize(planes)
    rows, cols = torch.triu_indices(n, n, offset=1)
    return cosine(normalized[rows], normalized[cols])


def pairwise_cosine_stats(templates: Union[TemplateSet, torch.Tensor]) -> PairwiseStats:
    """
    Inter-template similarity of a set.

    Returns:
        PairwiseStats; empty with mean 0 for n = 1
    """
    planes = _planes(templates).detach()
    n = planes.shape[0]
    values = pairwise_normalized_cosines(planes)
    rows, cols = torch.triu_indices(n, n, offset=1)
    pairs = [
        (int(i), int(j), float(v))
        for i, j, v in zip(rows.tolist(), cols.tolist(), values.tolist())
    ]
    mean = float(values.mean()) if pairs else 0.0
    return PairwiseStats(pairs=pairs, mean=mean)
