"""
Detection objectives: max-cosine binary cross-entropy for the proactive
scheme and softmax cross-entropy for the passive classifier baseline.
"""

from typing import Optional, Sequence, Union

import torch
import torch.nn.functional as F

from ..core.errors import ShapeError

SCORE_EPSILON = 1e-7

ScoresLike = Union[torch.Tensor, Sequence[float]]


def _as_tensor(values: ScoresLike, like: Optional[torch.Tensor] = None) -> torch.Tensor:
    if isinstance(values, torch.Tensor):
        return values
    dtype = like.dtype if like is not None else torch.float32
    return torch.as_tensor(list(values), dtype=dtype)


def detection_objective(max_scores: ScoresLike, labels: ScoresLike) -> torch.Tensor:
    """
    Binary cross-entropy on max-cosine scores.

    Scores are clamped to [eps, 1 - eps] and read as the probability that an
    image is an encrypted real (label 1); label 0 marks manipulated images.
    Negative cosines clamp to eps.

    Args:
        max_scores: Per-image max-cosine scores in [-1, 1]
        labels: Per-image labels in {0, 1}

    Returns:
        Mean loss over the images
    """
    scores = _as_tensor(max_scores)
    targets = _as_tensor(labels, like=scores).to(scores.dtype)
    if scores.shape != targets.shape:
        raise ShapeError(f"Got {scores.numel()} scores for {targets.numel()} labels")
    if scores.numel() == 0:
        raise ShapeError("Detection objective needs at least one score")

    probabilities = scores.clamp(SCORE_EPSILON, 1.0 - SCORE_EPSILON)
    losses = -(targets * torch.log(probabilities) + (1.0 - targets) * torch.log(1.0 - probabilities))
    return losses.mean()


def passive_cross_entropy(logits: torch.Tensor, labels: ScoresLike) -> torch.Tensor:
    """
    Softmax cross-entropy averaged over the batch.

    Args:
        logits: (B, 2); index 1 is the encrypted-real class
        labels: (B,) class indices
    """
    targets = _as_tensor(labels).long() if not isinstance(labels, torch.Tensor) else labels.long()
    if logits.dim() != 2 or logits.shape[0] != targets.shape[0]:
        raise ShapeError(
            f"Expected one logit row per label, got logits {tuple(logits.shape)} and {targets.shape[0]} labels"
        )
    return F.cross_entropy(logits, targets)
