"""
Unsupervised template-learning losses and their weighted sum.

Every loss accepts a single plane (H, W) or a batch of planes (B, H, W) and
returns a scalar for the former or a (B,) tensor for the latter.
``total_loss`` reduces each term by the batch mean.
"""

import logging
from dataclasses import dataclass
from typing import Dict, Union

import torch

from ..core.similarity import cosine
from ..core.types import FrequencyFilter, LossWeights
from ..templates.template_set import TemplateSet, minmax_normalize, pairwise_normalized_cosines

logger = logging.getLogger(__name__)

TemplatesLike = Union[TemplateSet, torch.Tensor]


def _planes(templates: TemplatesLike) -> torch.Tensor:
    if isinstance(templates, TemplateSet):
        return templates.planes
    return templates


def magnitude_loss(template: torch.Tensor) -> torch.Tensor:
    """J_m: squared L2 norm, summed over all pixels."""
    return (template * template).flatten(-2).sum(-1)


def recovery_loss(template: torch.Tensor, recovered: torch.Tensor) -> torch.Tensor:
    """J_r: 1 - Cos(S, S_R) on raw planes."""
    return 1.0 - cosine(template, recovered)


def lowpass_energy(template: torch.Tensor, filt: FrequencyFilter) -> torch.Tensor:
    """
    Energy of the centered k x k window of the unnormalized 2D spectrum.

    The spectrum is shifted so the DC bin sits at index side // 2; the window
    starts at side // 2 - k // 2.

    Args:
        template: Plane (..., H, W), square
        filt: Window size

    Returns:
        Sum of squared complex magnitudes inside the window
    """
    side = template.shape[-1]
    filt.check_side(side)

    spectrum = torch.fft.fftshift(torch.fft.fft2(template), dim=(-2, -1))
    start = side // 2 - filt.k // 2
    window = spectrum[..., start:start + filt.k, start:start + filt.k]
    energy = window.real ** 2 + window.imag ** 2
    return energy.flatten(-2).sum(-1)


def content_loss(template: torch.Tensor, filt: FrequencyFilter) -> torch.Tensor:
    """J_c: low-frequency energy of the template."""
    return lowpass_energy(template, filt)


def separation_loss(
    templates: TemplatesLike,
    recovered_fake: torch.Tensor,
    return_index: bool = False,
):
    """
    J_s: max over the set of Cos(N(S_i), N(S_F)).

    Args:
        templates: Set (n, H, W)
        recovered_fake: S_F, (H, W) or (B, H, W)
        return_index: Also return the index of the most similar template

    Returns:
        Loss value(s), or (values, indices) when return_index is set
    """
    planes = _planes(templates)
    if planes.shape[0] == 0:
        raise ValueError("Separation loss needs a nonempty template set")

    normalized_set = minmax_normalize(planes)
    normalized_fake = minmax_normalize(recovered_fake)
    if recovered_fake.dim() == 2:
        similarities = cosine(normalized_fake.unsqueeze(0), normalized_set)
    else:
        similarities = cosine(normalized_fake.unsqueeze(1), normalized_set.unsqueeze(0))

    values, indices = similarities.max(dim=-1)
    if return_index:
        return values, indices
    return values


def pairwise_set_loss(templates: TemplatesLike) -> torch.Tensor:
    """J_p: sum over i < j of Cos(N(S_i), N(S_j)); 0 for a single template."""
    planes = _planes(templates)
    return pairwise_normalized_cosines(planes).sum()


@dataclass
class LossBreakdown:
    """
    The five loss terms, their weights and the weighted total.

    Terms are batch means and stay attached to the autograd graph;
    ``to_dict`` detaches them for logging.
    """
    j_m: torch.Tensor
    j_r: torch.Tensor
    j_c: torch.Tensor
    j_s: torch.Tensor
    j_p: torch.Tensor
    total: torch.Tensor
    weights: LossWeights

    def terms(self) -> Dict[str, torch.Tensor]:
        return {"J_m": self.j_m, "J_r": self.j_r, "J_c": self.j_c, "J_s": self.j_s, "J_p": self.j_p}

    def recombine(self) -> float:
        """Weighted sum of the detached terms, for loss accounting checks."""
        return sum(
            self.weights.for_loss(name) * float(value)
            for name, value in self.terms().items()
        )

    def to_dict(self) -> Dict[str, float]:
        result = {name: float(value.detach()) for name, value in self.terms().items()}
        result["total"] = float(self.total.detach())
        return result


def total_loss(
    templates: TemplatesLike,
    selected: torch.Tensor,
    recovered_real: torch.Tensor,
    recovered_fake: torch.Tensor,
    weights: LossWeights,
    filt: FrequencyFilter,
) -> LossBreakdown:
    """
    Weighted template-learning objective J.

    J_m and J_c apply to the templates selected for the batch items, J_r
    compares each selected template with its S_R, J_s uses S_F, and J_p sees
    the whole set.

    Args:
        templates: Full set (n, H, W), possibly a trainable parameter
        selected: Selected templates, (H, W) or (B, H, W)
        recovered_real: S_R with the shape of ``selected``
        recovered_fake: S_F with the shape of ``selected``
        weights: Loss weights
        filt: Low-pass window for J_c

    Returns:
        LossBreakdown whose ``total`` is differentiable
    """
    j_m = magnitude_loss(selected).mean()
    j_r = recovery_loss(selected, recovered_real).mean()
    j_c = content_loss(selected, filt).mean()
    j_s = separation_loss(templates, recovered_fake).mean()
    j_p = pairwise_set_loss(templates)

    total = (
        weights.lambda1 * j_m
        + weights.lambda2 * j_r
        + weights.lambda3 * j_c
        + weights.lambda4 * j_s
        + weights.lambda5 * j_p
    )
    return LossBreakdown(j_m=j_m, j_r=j_r, j_c=j_c, j_s=j_s, j_p=j_p, total=total, weights=weights)
