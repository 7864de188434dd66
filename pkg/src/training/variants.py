"""
Ablation and baseline training variants.
"""

import logging
import time

import torch

from ..core.rng import make_rng
from ..core.types import LOSS_NAMES
from ..data.loader import ImageCorpus
from ..losses import passive_cross_entropy
from ..manipulators import get_manipulator
from ..models import classifier_forward, init_classifier
from ..templates import encrypt, init_template_set
from .config import TrainConfig
from .log import TrainLog
from .trainer import (
    MODEL_STREAM,
    ORDER_STREAM,
    SELECTION_STREAM,
    TEMPLATE_STREAM,
    AdversarialAttack,
    Trainer,
    TrainResult,
    batch_order,
    check_corpus,
    check_divergence,
)

logger = logging.getLogger(__name__)


def train_fixed_template(cfg: TrainConfig, corpus: ImageCorpus) -> TrainResult:
    """
    Train only the encoder; the template set stays at its initialization.

    The losses that act only on templates (J_m, J_c, J_p) are weighted by
    zero; J_r, J_s and the detection objective train the encoder.
    """
    cfg = cfg.with_overrides(
        weights=cfg.weights.without("J_m", "J_c", "J_p"),
        variant="fixed_template",
    )
    return Trainer(cfg, corpus, update_templates=False).run()


def remove_loss_variant(cfg: TrainConfig, corpus: ImageCorpus, dropped: str) -> TrainResult:
    """
    Train with one loss weighted by zero.

    Args:
        dropped: One of J_m, J_r, J_c, J_s, J_p

    Raises:
        ValueError: If the loss name is unknown
    """
    weights = cfg.weights.without(dropped)
    name = next(loss for loss in LOSS_NAMES if loss.lower() == dropped.strip().lower())
    cfg = cfg.with_overrides(weights=weights, variant=f"remove_{name}")
    return Trainer(cfg, corpus).run()


def train_adversarial_baseline(
    cfg: TrainConfig,
    corpus: ImageCorpus,
    attack: str = "fgsm",
    epsilon: float = 0.03,
    steps: int = 1,
) -> TrainResult:
    """
    Replace the template constraints with an adversarial noise budget.

    J_m, J_c and J_p are dropped. Templates move by sign-gradient steps
    (one for fgsm, ``steps`` for pgd) and are projected back into the L-inf
    ball of radius epsilon around their initialization; the encoder trains
    with Adam as usual.

    Raises:
        ValueError: If epsilon <= 0, or fgsm is asked for more than one step
    """
    adversarial = AdversarialAttack(method=attack, epsilon=epsilon, steps=steps)
    cfg = cfg.with_overrides(
        weights=cfg.weights.without("J_m", "J_c", "J_p"),
        variant=f"adversarial_{attack}_eps{epsilon:g}_steps{steps}",
    )
    return Trainer(cfg, corpus, attack=adversarial).run()


def train_passive_classifier(cfg: TrainConfig, corpus: ImageCorpus) -> TrainResult:
    """
    Train the passive classifier on encrypted-real vs manipulated images.

    Templates are fixed at their initialization and only used to encrypt.
    Labels: 1 for encrypted-real, 0 for manipulated.
    """
    cfg = cfg.with_overrides(variant="passive_classifier")
    check_corpus(corpus, cfg.image_side)

    root = make_rng(cfg.seed)
    order_rng = root.spawn(ORDER_STREAM)
    selection_rng = root.spawn(SELECTION_STREAM)
    templates = init_template_set(cfg.n, cfg.image_side, root.spawn(TEMPLATE_STREAM))
    classifier = init_classifier(root.spawn(MODEL_STREAM), image_side=cfg.image_side)
    manipulator = get_manipulator(cfg.manipulator, image_side=cfg.image_side)
    optimizer = torch.optim.Adam(classifier.parameters(), lr=cfg.learning_rate)

    log = TrainLog(config_hash=cfg.config_hash(), variant=cfg.variant)
    planes = templates.planes
    started = time.perf_counter()
    step = 0
    reference = None

    logger.info(f"Training passive classifier: {len(corpus)} images, {cfg.epochs} epochs")
    for epoch in range(cfg.epochs):
        for batch in batch_order(order_rng, len(corpus), cfg.batch_size):
            images = corpus.stack(batch)
            indices = torch.as_tensor([selection_rng.integers(0, cfg.n) for _ in range(len(batch))])
            encrypted = encrypt(images, planes[indices], cfg.encrypt_config)
            with torch.no_grad():
                manipulated = manipulator.manipulate(encrypted)

            logits = classifier_forward(classifier, torch.cat([encrypted, manipulated]), mode="train")
            labels = torch.cat([torch.ones(len(batch)), torch.zeros(len(batch))]).long()
            loss = passive_cross_entropy(logits, labels)
            value = check_divergence(loss, step, reference)
            if reference is None:
                reference = value

            optimizer.zero_grad()
            loss.backward()
            optimizer.step()

            log.add_step({"step": step, "epoch": epoch, "cross_entropy": value, "total": value})
            step += 1

        epoch_losses = [s["total"] for s in log.steps if s["epoch"] == epoch]
        log.add_epoch({"epoch": epoch, "mean_total": sum(epoch_losses) / len(epoch_losses)})

    log.wall_clock_seconds = time.perf_counter() - started
    classifier.eval()
    return TrainResult(
        config=cfg,
        templates=templates,
        log=log,
        manipulator=manipulator,
        classifier=classifier,
        initial_templates=templates,
    )
