"""
End-to-end evaluation: encrypt held-out images, manipulate, score.
"""

import logging
import time
from dataclasses import dataclass
from typing import List, Optional, Union

import numpy as np
import torch

from ..augment import AugmentationPipeline
from ..core.errors import EmptyCorpusError
from ..core.rng import make_rng
from ..core.types import EncryptConfig
from ..data.loader import ImageCorpus
from ..manipulators import BaseManipulator
from ..metrics import psnr
from ..models import PassiveClassifier, classifier_forward, real_probability
from ..templates import TemplateSet, encrypt
from .report import DetectionCollector, DetectionReport
from .scoring import Recoverer, ScoreRow, score_dataset, score_image

logger = logging.getLogger(__name__)

EVAL_SELECTION_STREAM = 10
EVAL_AUGMENT_STREAM = 11


@dataclass
class EvaluationSet:
    """Encrypted-real and manipulated versions of a test corpus."""
    ids: List[str]
    originals: torch.Tensor
    encrypted: torch.Tensor
    manipulated: torch.Tensor
    template_indices: List[int]


def export_encrypt_config(strength: float) -> EncryptConfig:
    """Encryption as applied to distributed images: clamped to [0, 1]."""
    return EncryptConfig(strength=strength, clamp_on_export=True)


def build_evaluation_set(
    templates: TemplateSet,
    manipulator: BaseManipulator,
    corpus: ImageCorpus,
    strength: float,
    seed: int,
    augmentation: Optional[AugmentationPipeline] = None,
) -> EvaluationSet:
    """
    Encrypt each image with a randomly selected template, optionally apply
    test-time augmentation, and manipulate the result.

    Template choices and augmentation draws come from streams derived from
    ``seed``, so the same seed gives the same evaluation set.
    """
    if len(corpus) == 0:
        raise EmptyCorpusError("Evaluation corpus contains no images")

    root = make_rng(seed)
    selection_rng = root.spawn(EVAL_SELECTION_STREAM)
    augment_rng = root.spawn(EVAL_AUGMENT_STREAM)
    cfg = export_encrypt_config(strength)

    originals = corpus.images()
    indices = [selection_rng.integers(0, templates.n) for _ in range(len(corpus))]
    with torch.no_grad():
        encrypted = encrypt(originals, templates.planes[torch.as_tensor(indices)], cfg)
        if augmentation:
            encrypted = augmentation(encrypted, augment_rng)
        manipulated = manipulator.manipulate(encrypted)

    return EvaluationSet(
        ids=corpus.ids,
        originals=originals,
        encrypted=encrypted,
        manipulated=manipulated,
        template_indices=indices,
    )


def evaluate_detector(
    encoder: Recoverer,
    templates: TemplateSet,
    manipulator: BaseManipulator,
    corpus: ImageCorpus,
    strength: float,
    seed: int,
    far: float = 0.005,
    augmentation: Optional[AugmentationPipeline] = None,
    config_hash: str = "",
    max_workers: int = 4,
) -> DetectionReport:
    """
    Score encrypted-real (label 1) and manipulated (label 0) test images.

    Returns:
        DetectionReport with AP, TDR at ``far`` and mean PSNR of the
        encrypted images against the originals
    """
    data = build_evaluation_set(templates, manipulator, corpus, strength, seed, augmentation)
    count = len(data.ids)

    collector = DetectionCollector(far=far, config_hash=config_hash)
    collector.start()
    rows = score_dataset(
        encoder,
        templates,
        list(data.encrypted) + list(data.manipulated),
        labels=[1] * count + [0] * count,
        template_indices=data.template_indices * 2,
        ids=[f"{i}:real" for i in data.ids] + [f"{i}:{manipulator.name}" for i in data.ids],
        max_workers=max_workers,
    )
    collector.stop()
    for row in rows:
        collector.record(row)
    for original, encrypted in zip(data.originals, data.encrypted):
        collector.record_psnr(psnr(original, encrypted))

    report = collector.calculate()
    report.metadata["manipulator"] = manipulator.describe()
    logger.info(
        f"Evaluated on {manipulator.name}: AP={report.ap}, TDR@{far}={report.tdr}, PSNR={report.psnr_mean}, "
        f"{1000.0 * collector.elapsed / max(len(rows), 1):.2f} ms/image"
    )
    return report


def evaluate_classifier(
    classifier: PassiveClassifier,
    templates: TemplateSet,
    manipulator: BaseManipulator,
    corpus: ImageCorpus,
    strength: float,
    seed: int,
    far: float = 0.005,
    config_hash: str = "",
) -> DetectionReport:
    """Score the passive baseline by its encrypted-real probability."""
    data = build_evaluation_set(templates, manipulator, corpus, strength, seed)
    count = len(data.ids)

    with torch.no_grad():
        real_probs = real_probability(classifier_forward(classifier, data.encrypted, mode="eval"))
        fake_probs = real_probability(classifier_forward(classifier, data.manipulated, mode="eval"))

    collector = DetectionCollector(far=far, config_hash=config_hash)
    for i in range(count):
        collector.record(ScoreRow(id=f"{data.ids[i]}:real", score=float(real_probs[i]), argmax=-1,
                                  label=1, template_index=data.template_indices[i]))
    for i in range(count):
        collector.record(ScoreRow(id=f"{data.ids[i]}:{manipulator.name}", score=float(fake_probs[i]), argmax=-1,
                                  label=0, template_index=data.template_indices[i]))
    for original, encrypted in zip(data.originals, data.encrypted):
        collector.record_psnr(psnr(original, encrypted))

    report = collector.calculate()
    report.metadata["manipulator"] = manipulator.describe()
    report.metadata["detector"] = "passive_classifier"
    return report


def measure_latency(
    encoder: Recoverer,
    templates: Union[TemplateSet, torch.Tensor],
    images: Union[ImageCorpus, List[torch.Tensor]],
    repeats: int = 1,
) -> float:
    """
    Mean wall-clock milliseconds per score_image call.

    The first image is scored once untimed to warm up.
    """
    tensors = [record.image for record in images] if isinstance(images, ImageCorpus) else list(images)
    if not tensors:
        raise EmptyCorpusError("Cannot measure latency on an empty corpus")

    score_image(encoder, templates, tensors[0])
    timings = []
    for _ in range(repeats):
        for image in tensors:
            started = time.perf_counter()
            score_image(encoder, templates, image)
            timings.append(time.perf_counter() - started)
    return 1000.0 * float(np.mean(timings))
