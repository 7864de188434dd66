"""
Template selection schemes evaluated with oracle knowledge of the
manipulator: best/worst per image, random, and biasing a single template.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np
import torch

from ..core.errors import EmptyCorpusError
from ..core.rng import make_rng
from ..core.similarity import cosine, cosine_to_set
from ..core.types import EncryptConfig
from ..data.loader import ImageCorpus
from ..manipulators import BaseManipulator
from ..metrics import average_precision
from ..templates import TemplateSet, encrypt
from .scoring import Recoverer, recover

logger = logging.getLogger(__name__)

RANDOM_SELECTION_STREAM = 12


@dataclass
class SelectionTable:
    """
    Per-image, per-template quantities from encrypting every image with
    every template.

    Attributes:
        gaps: (N, n) d_i = Cos(S_i, S_R) - Cos(S_i, S_F)
        real_scores: (N, n) max-cosine score of the encrypted image
        fake_scores: (N, n) max-cosine score of its manipulated version
    """
    gaps: np.ndarray
    real_scores: np.ndarray
    fake_scores: np.ndarray

    def ap_for(self, choice: np.ndarray) -> float:
        """AP when image j is encrypted with template choice[j]."""
        rows = np.arange(len(choice))
        scores = np.concatenate([self.real_scores[rows, choice], self.fake_scores[rows, choice]])
        labels = [1] * len(choice) + [0] * len(choice)
        return average_precision(scores, labels)


@dataclass
class SelectionResult:
    """Best/worst/random selection outcome."""
    best_indices: List[int]
    worst_indices: List[int]
    random_indices: List[int]
    ap_best: float
    ap_worst: float
    ap_random: float
    gaps: List[List[float]] = field(default_factory=list)

    @property
    def ordering_holds(self) -> bool:
        """Whether AP_best >= AP_random >= AP_worst on this corpus."""
        return self.ap_best >= self.ap_random >= self.ap_worst

    def to_dict(self) -> Dict[str, Any]:
        return {
            "ap_best": self.ap_best,
            "ap_random": self.ap_random,
            "ap_worst": self.ap_worst,
            "ordering_holds": self.ordering_holds,
            "best_indices": self.best_indices,
            "worst_indices": self.worst_indices,
        }


@dataclass
class BiasOneResult:
    """AP per template when every image is encrypted with that template."""
    aps: List[float]

    @property
    def mean(self) -> float:
        return float(np.mean(self.aps))

    @property
    def spread(self) -> float:
        return float(np.std(self.aps))

    @property
    def min(self) -> float:
        return float(np.min(self.aps))

    @property
    def max(self) -> float:
        return float(np.max(self.aps))

    def to_dict(self) -> Dict[str, Any]:
        return {"aps": self.aps, "mean": self.mean, "spread": self.spread, "min": self.min, "max": self.max}


def selection_table(
    encoder: Recoverer,
    templates: TemplateSet,
    manipulator: BaseManipulator,
    images: ImageCorpus,
    cfg: EncryptConfig,
) -> SelectionTable:
    """Encrypt every image with every template and record gaps and scores."""
    if len(images) == 0:
        raise EmptyCorpusError("Selection needs at least one image")

    planes = templates.planes
    originals = images.images()
    count, n = len(images), templates.n
    gaps = np.zeros((count, n))
    real_scores = np.zeros((count, n))
    fake_scores = np.zeros((count, n))

    for i in range(n):
        with torch.no_grad():
            encrypted = encrypt(originals, planes[i], cfg)
            manipulated = manipulator.manipulate(encrypted)
        recovered_real = recover(encoder, encrypted)
        recovered_fake = recover(encoder, manipulated)
        template = planes[i].to(recovered_real.dtype)

        gaps[:, i] = (cosine(template, recovered_real) - cosine(template, recovered_fake)).numpy()
        real_scores[:, i] = cosine_to_set(recovered_real, planes).max(dim=-1).values.numpy()
        fake_scores[:, i] = cosine_to_set(recovered_fake, planes).max(dim=-1).values.numpy()

    return SelectionTable(gaps=gaps, real_scores=real_scores, fake_scores=fake_scores)


def selection_best_worst_oracle(
    encoder: Recoverer,
    templates: TemplateSet,
    manipulator: BaseManipulator,
    images: ImageCorpus,
    cfg: EncryptConfig,
    seed: int = 0,
) -> SelectionResult:
    """
    Pick per image the template with the largest (best) and smallest
    (worst) real-vs-manipulated cosine gap, and compare with random
    selection.

    Gap dominance per image does not imply AP dominance in general, since AP
    depends on the ranking of max-cosine scores across images;
    ``ordering_holds`` reports whether it held.

    Returns:
        SelectionResult with per-image indices and AP under each scheme
    """
    table = selection_table(encoder, templates, manipulator, images, cfg)
    best = table.gaps.argmax(axis=1)
    worst = table.gaps.argmin(axis=1)
    random_rng = make_rng(seed).spawn(RANDOM_SELECTION_STREAM)
    random_choice = np.asarray([random_rng.integers(0, templates.n) for _ in range(len(images))])

    result = SelectionResult(
        best_indices=best.tolist(),
        worst_indices=worst.tolist(),
        random_indices=random_choice.tolist(),
        ap_best=table.ap_for(best),
        ap_worst=table.ap_for(worst),
        ap_random=table.ap_for(random_choice),
        gaps=table.gaps.tolist(),
    )
    if not result.ordering_holds:
        logger.warning(
            f"Selection AP ordering does not hold: best={result.ap_best:.4f}, "
            f"random={result.ap_random:.4f}, worst={result.ap_worst:.4f}"
        )
    return result


def selection_bias_one(
    encoder: Recoverer,
    templates: TemplateSet,
    manipulator: BaseManipulator,
    images: ImageCorpus,
    cfg: EncryptConfig,
) -> BiasOneResult:
    """
    Evaluate the corpus n times, encrypting every image with the same
    template each time.

    Returns:
        BiasOneResult with one AP per template
    """
    table = selection_table(encoder, templates, manipulator, images, cfg)
    aps = [table.ap_for(np.full(len(images), i)) for i in range(templates.n)]
    return BiasOneResult(aps=aps)
