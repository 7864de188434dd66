"""
Max-cosine scoring of images against a learned template set.
"""

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple, Union

import torch

from ..core.errors import EmptyCorpusError
from ..core.similarity import max_cosine
from ..data.loader import ImageCorpus
from ..models import RecoveryEncoder, encoder_forward
from ..templates import TemplateSet

logger = logging.getLogger(__name__)

Recoverer = Union[RecoveryEncoder, Callable[[torch.Tensor], torch.Tensor]]


@dataclass
class ScoreRow:
    """
    One scored image.

    Attributes:
        id: Image identifier
        score: max_i Cos(E(image), S_i)
        argmax: Index of the most similar template
        label: 1 for encrypted-real, 0 for manipulated, None if unknown
        template_index: Template added at encryption, -1 if unknown
    """
    id: str
    score: float
    argmax: int
    label: Optional[int] = None
    template_index: int = -1
    metadata: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "path": self.id,
            "score": self.score,
            "argmax": self.argmax,
            "label": self.label,
            "template_index": self.template_index,
        }


def recover(encoder: Recoverer, images: torch.Tensor) -> torch.Tensor:
    """
    Recovered planes (B, H, W) for a batch, in eval mode without gradients.

    Any callable mapping (B, 3, H, W) to (B, H, W) is accepted in place of a
    trained encoder.
    """
    with torch.no_grad():
        if isinstance(encoder, RecoveryEncoder):
            return encoder_forward(encoder, images, mode="eval")
        return encoder(images)


def _planes(templates: Union[TemplateSet, torch.Tensor]) -> torch.Tensor:
    return templates.planes if isinstance(templates, TemplateSet) else templates


def score_image(
    encoder: Recoverer,
    templates: Union[TemplateSet, torch.Tensor],
    image: torch.Tensor,
) -> Tuple[float, int]:
    """
    Detection score of one image.

    Args:
        encoder: Recovery encoder
        templates: Learned set
        image: (3, H, W)

    Returns:
        Tuple of (score, argmax index); ties resolve to the lowest index
    """
    recovered = recover(encoder, image.unsqueeze(0))[0]
    score, index = max_cosine(recovered, _planes(templates).to(recovered.dtype))
    return float(score), int(index)


def score_dataset(
    encoder: Recoverer,
    templates: Union[TemplateSet, torch.Tensor],
    images: Union[ImageCorpus, Sequence[torch.Tensor], torch.Tensor],
    labels: Optional[Sequence[Optional[int]]] = None,
    template_indices: Optional[Sequence[int]] = None,
    ids: Optional[Sequence[str]] = None,
    max_workers: int = 4,
) -> List[ScoreRow]:
    """
    Score a corpus image by image.

    Rows come back in input order regardless of worker scheduling. Any
    encoder/template-set pairing is accepted, including artifacts trained
    from different seeds.

    Args:
        encoder: Recovery encoder
        templates: Learned set
        images: Corpus, list of (3, H, W) tensors or an (N, 3, H, W) batch
        labels: Per-image labels (taken from the corpus when omitted)
        template_indices: Encryption template per image, for diagnostics
        ids: Per-image identifiers
        max_workers: Thread pool size

    Returns:
        List of ScoreRow

    Raises:
        EmptyCorpusError: If there are no images
    """
    if isinstance(images, ImageCorpus):
        ids = ids or images.ids
        labels = labels if labels is not None else images.labels
        images = [record.image for record in images]
    tensors = list(images)
    if not tensors:
        raise EmptyCorpusError("Cannot score an empty corpus")

    count = len(tensors)
    ids = list(ids) if ids is not None else [str(i) for i in range(count)]
    labels = list(labels) if labels is not None else [None] * count
    template_indices = list(template_indices) if template_indices is not None else [-1] * count

    with ThreadPoolExecutor(max_workers=max(1, max_workers)) as executor:
        results = list(executor.map(lambda image: score_image(encoder, templates, image), tensors))

    rows = [
        ScoreRow(id=ids[i], score=score, argmax=index, label=labels[i], template_index=int(template_indices[i]))
        for i, (score, index) in enumerate(results)
    ]
    logger.debug(f"Scored {count} images against {_planes(templates).shape[0]} templates")
    return rows
