"""
Template-learning losses and detection objectives.
"""

from .template_losses import (
    LossBreakdown,
    magnitude_loss,
    recovery_loss,
    lowpass_energy,
    content_loss,
    separation_loss,
    pairwise_set_loss,
    total_loss,
)
from .objectives import SCORE_EPSILON, detection_objective, passive_cross_entropy

__all__ = [
    "LossBreakdown",
    "magnitude_loss",
    "recovery_loss",
    "lowpass_energy",
    "content_loss",
    "separation_loss",
    "pairwise_set_loss",
    "total_loss",
    "SCORE_EPSILON",
    "detection_objective",
    "passive_cross_entropy",
]
