"""
Template and encoder training, with ablation and baseline variants.
"""

from .config import CorpusConfig, TrainConfig
from .log import TrainLog
from .trainer import AdversarialAttack, Trainer, TrainResult, train, DIVERGENCE_FACTOR
from .variants import (
    train_fixed_template,
    train_passive_classifier,
    train_adversarial_baseline,
    remove_loss_variant,
)

__all__ = [
    "CorpusConfig",
    "TrainConfig",
    "TrainLog",
    "AdversarialAttack",
    "Trainer",
    "TrainResult",
    "train",
    "DIVERGENCE_FACTOR",
    "train_fixed_template",
    "train_passive_classifier",
    "train_adversarial_baseline",
    "remove_loss_variant",
]
