"""
Joint training of the template set and the recovery encoder.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
import torch
import torch.nn as nn

from ..augment import AugmentationPipeline
from ..core.errors import DivergenceError, EmptyCorpusError, ForensicsError, ShapeError
from ..core.rng import RngStream, make_rng
from ..core.similarity import max_cosine
from ..data.loader import ImageCorpus
from ..losses import LossBreakdown, detection_objective, total_loss
from ..manipulators import BaseManipulator, get_manipulator
from ..models import PassiveClassifier, RecoveryEncoder, encoder_forward, init_encoder
from ..templates import TemplateSet, encrypt, init_template_set, pairwise_cosine_stats
from .config import TrainConfig
from .log import TrainLog

logger = logging.getLogger(__name__)

# Growth over the first logged loss that counts as divergence
DIVERGENCE_FACTOR = 1e6

# Stream tags; each concern draws from its own child stream
TEMPLATE_STREAM = 0
MODEL_STREAM = 1
ORDER_STREAM = 2
SELECTION_STREAM = 3
AUGMENT_STREAM = 4


@dataclass
class AdversarialAttack:
    """Sign-gradient template updates projected to an L-inf ball."""
    method: str
    epsilon: float
    steps: int = 1

    def __post_init__(self):
        if self.method not in ("fgsm", "pgd"):
            raise ValueError(f"Unknown attack: {self.method}. Available: fgsm, pgd")
        if not self.epsilon > 0:
            raise ValueError(f"Attack epsilon must be > 0, got {self.epsilon}")
        if self.steps < 1:
            raise ValueError(f"Attack steps must be >= 1, got {self.steps}")
        if self.method == "fgsm" and self.steps > 1:
            raise ValueError("fgsm takes a single step; use pgd for iterated steps")

    @property
    def step_size(self) -> float:
        if self.method == "fgsm":
            return self.epsilon
        return 2.5 * self.epsilon / self.steps

    def to_dict(self) -> Dict[str, Any]:
        return {"method": self.method, "epsilon": self.epsilon, "steps": self.steps}


@dataclass
class TrainResult:
    """Artifacts of a training run."""
    config: TrainConfig
    templates: TemplateSet
    log: TrainLog
    manipulator: BaseManipulator
    encoder: Optional[RecoveryEncoder] = None
    classifier: Optional[PassiveClassifier] = None
    initial_templates: Optional[TemplateSet] = None

    def sidecar(self) -> Dict[str, Any]:
        """Provenance stored next to the template file."""
        return {
            "config": self.config.to_dict(),
            "config_hash": self.config.config_hash(),
            "variant": self.config.variant,
            "loss_weights": self.config.weights.to_dict(),
            "manipulator_checksum": self.manipulator.checksum(),
        }


def batch_order(rng: RngStream, size: int, batch_size: int) -> List[np.ndarray]:
    """Shuffled index batches for one epoch; the last batch may be short."""
    order = rng.permutation(size)
    return [order[start:start + batch_size] for start in range(0, size, batch_size)]


def check_divergence(value: torch.Tensor, step: int, reference: Optional[float] = None) -> float:
    """
    Raise DivergenceError if a loss is non-finite, or grows past
    DIVERGENCE_FACTOR times the reference (first-step) loss.

    The reference is floored at 1.
    """
    scalar = float(value.detach())
    limit = math.inf if reference is None else DIVERGENCE_FACTOR * max(abs(reference), 1.0)
    if not math.isfinite(scalar) or scalar > limit:
        raise DivergenceError(
            f"Training diverged at step {step}: loss = {scalar}",
            step=step,
            value=scalar,
        )
    return scalar


def check_corpus(corpus: ImageCorpus, side: int) -> None:
    if len(corpus) == 0:
        raise EmptyCorpusError("Training corpus contains no images")
    image_side = corpus[0].image.shape[-1]
    if image_side != side:
        raise ShapeError(f"Corpus images are {image_side}x{image_side}, config expects {side}x{side}")


class Trainer:
    """
    End-to-end optimization of templates and encoder.

    Each batch: select a template per image, encrypt, optionally augment,
    manipulate with the frozen manipulator, recover S_R and S_F, then take
    one Adam step on the weighted template losses plus the max-cosine
    detection objective over both branches.

    Example:
        trainer = Trainer(cfg, corpus)
        trainer.on_step(lambda record: print(record["total"]))
        result = trainer.run()
    """

    def __init__(
        self,
        cfg: TrainConfig,
        corpus: ImageCorpus,
        update_templates: bool = True,
        attack: Optional[AdversarialAttack] = None,
    ):
        """
        Initialize trainer.

        Args:
            cfg: Training configuration
            corpus: Real training images
            update_templates: False keeps the template set fixed
            attack: Replace the Adam template update with projected
                sign-gradient steps
        """
        check_corpus(corpus, cfg.image_side)
        self.cfg = cfg
        self.corpus = corpus
        self.update_templates = update_templates
        self.attack = attack

        root = make_rng(cfg.seed)
        self._order_rng = root.spawn(ORDER_STREAM)
        self._selection_rng = root.spawn(SELECTION_STREAM)
        self._augment_root = root.spawn(AUGMENT_STREAM)

        self.initial_templates = init_template_set(cfg.n, cfg.image_side, root.spawn(TEMPLATE_STREAM))
        self.templates = nn.Parameter(
            self.initial_templates.as_tensor(),
            requires_grad=update_templates,
        )
        self.encoder = init_encoder(root.spawn(MODEL_STREAM), image_side=cfg.image_side)
        self.manipulator = get_manipulator(cfg.manipulator, image_side=cfg.image_side)
        self.pipeline = AugmentationPipeline.from_recipe(cfg.augmentation)

        params: List[torch.Tensor] = list(self.encoder.parameters())
        if update_templates and attack is None:
            params = [self.templates] + params
        self.optimizer = torch.optim.Adam(params, lr=cfg.learning_rate)

        self.log = TrainLog(config_hash=cfg.config_hash(), variant=cfg.variant)
        self._on_step: Optional[Callable[[Dict[str, Any]], None]] = None
        self._on_epoch: Optional[Callable[[Dict[str, Any]], None]] = None
        self._reference_loss: Optional[float] = None

    def on_step(self, callback: Callable[[Dict[str, Any]], None]) -> "Trainer":
        """Set per-step callback, called with the step record."""
        self._on_step = callback
        return self

    def on_epoch(self, callback: Callable[[Dict[str, Any]], None]) -> "Trainer":
        """Set per-epoch callback, called with the epoch record."""
        self._on_epoch = callback
        return self

    def _forward(
        self,
        images: torch.Tensor,
        indices: torch.Tensor,
        augment_rng: RngStream,
    ) -> Tuple[torch.Tensor, LossBreakdown, torch.Tensor]:
        selected = self.templates[indices]
        encrypted = encrypt(images, selected, self.cfg.encrypt_config)
        if self.pipeline:
            encrypted = self.pipeline(encrypted, augment_rng)
        manipulated = self.manipulator.manipulate(encrypted)

        recovered_real = encoder_forward(self.encoder, encrypted, mode="train")
        recovered_fake = encoder_forward(self.encoder, manipulated, mode="train")

        breakdown = total_loss(
            self.templates,
            selected,
            recovered_real,
            recovered_fake,
            self.cfg.weights,
            self.cfg.frequency_filter,
        )
        real_scores, _ = max_cosine(recovered_real, self.templates)
        fake_scores, _ = max_cosine(recovered_fake, self.templates)
        detection = detection_objective(
            torch.cat([real_scores, fake_scores]),
            torch.cat([torch.ones_like(real_scores), torch.zeros_like(fake_scores)]),
        )
        return breakdown.total + detection, breakdown, detection

    def _adversarial_update(self, images: torch.Tensor, indices: torch.Tensor, augment_rng: RngStream) -> None:
        initial = self.initial_templates.planes
        for _ in range(self.attack.steps):
            loss, _, _ = self._forward(images, indices, augment_rng.spawn(0))
            (gradient,) = torch.autograd.grad(loss, self.templates)
            with torch.no_grad():
                self.templates -= self.attack.step_size * gradient.sign()
                self.templates.copy_(
                    torch.clamp(self.templates, initial - self.attack.epsilon, initial + self.attack.epsilon)
                )

    def _step(self, step: int, epoch: int, batch: np.ndarray) -> Dict[str, Any]:
        images = self.corpus.stack(batch)
        indices = torch.as_tensor(
            [self._selection_rng.integers(0, self.cfg.n) for _ in range(len(batch))],
            dtype=torch.long,
        )
        augment_rng = self._augment_root.spawn(step)

        if self.attack is not None:
            self._adversarial_update(images, indices, augment_rng)

        loss, breakdown, detection = self._forward(images, indices, augment_rng.spawn(0))
        value = check_divergence(loss, step, self._reference_loss)
        if self._reference_loss is None:
            self._reference_loss = value

        self.optimizer.zero_grad()
        loss.backward()
        self.optimizer.step()
        if self.attack is not None:
            self.templates.grad = None

        record = {"step": step, "epoch": epoch, **breakdown.to_dict()}
        record["detection"] = float(detection.detach())
        record["objective"] = float(loss.detach())
        record["template_indices"] = indices.tolist()
        return record

    def _end_epoch(self, epoch: int, checksum: str) -> Dict[str, Any]:
        current = self.manipulator.checksum()
        if current != checksum:
            raise ForensicsError(f"Manipulator parameters changed during epoch {epoch}")
        stats = pairwise_cosine_stats(self.templates.detach())
        epoch_steps = [s for s in self.log.steps if s["epoch"] == epoch]
        return {
            "epoch": epoch,
            "pairwise_mean": stats.mean,
            "mean_J_r": float(np.mean([s["J_r"] for s in epoch_steps])) if epoch_steps else 0.0,
            "mean_total": float(np.mean([s["total"] for s in epoch_steps])) if epoch_steps else 0.0,
            "manipulator_checksum": current,
        }

    def run(self) -> TrainResult:
        """
        Train for cfg.epochs epochs.

        Returns:
            TrainResult with the trained set, encoder and log

        Raises:
            DivergenceError: If the loss becomes non-finite or explodes
        """
        checksum = self.manipulator.checksum()
        started = time.perf_counter()
        step = 0

        logger.info(
            f"Training {self.cfg.variant}: n={self.cfg.n}, m={self.cfg.strength}, "
            f"{len(self.corpus)} images, {self.cfg.epochs} epochs"
        )
        for epoch in range(self.cfg.epochs):
            for batch in batch_order(self._order_rng, len(self.corpus), self.cfg.batch_size):
                record = self._step(step, epoch, batch)
                self.log.add_step(record)
                if self._on_step:
                    self._on_step(record)
                step += 1

            epoch_record = self._end_epoch(epoch, checksum)
            self.log.add_epoch(epoch_record)
            logger.info(
                f"Epoch {epoch + 1}/{self.cfg.epochs}: total={epoch_record['mean_total']:.4f}, "
                f"J_r={epoch_record['mean_J_r']:.4f}, pairwise={epoch_record['pairwise_mean']:.4f}"
            )
            if self._on_epoch:
                self._on_epoch(epoch_record)

        self.log.wall_clock_seconds = time.perf_counter() - started
        self.encoder.eval()

        templates = TemplateSet(
            planes=self.templates.detach(),
            seed=self.cfg.seed,
            metadata={"config_hash": self.log.config_hash, "variant": self.cfg.variant},
        )
        return TrainResult(
            config=self.cfg,
            templates=templates,
            log=self.log,
            manipulator=self.manipulator,
            encoder=self.encoder,
            initial_templates=self.initial_templates,
        )


def train(cfg: TrainConfig, corpus: ImageCorpus, **callbacks) -> TrainResult:
    """
    Jointly train a template set and recovery encoder.

    Args:
        cfg: Training configuration
        corpus: Real training images
        **callbacks: Optional ``on_step`` / ``on_epoch`` callables

    Returns:
        TrainResult
    """
    trainer = Trainer(cfg, corpus)
    if callbacks.get("on_step"):
        trainer.on_step(callbacks["on_step"])
    if callbacks.get("on_epoch"):
        trainer.on_epoch(callbacks["on_epoch"])
    return trainer.run()
