"""
Detection metrics: average precision, TDR at a fixed FAR, and PSNR.

Polarity: encrypted-real images are the positive class and carry high
max-cosine scores; manipulated images are detected when their score falls
strictly below the threshold.
"""

import math
from typing import Sequence, Tuple, Union

import numpy as np
import torch
from sklearn.metrics import average_precision_score, precision_recall_curve

from .core.errors import MetricError, ShapeError

ScoreList = Union[Sequence[float], np.ndarray]


def _as_array(values: ScoreList, name: str) -> np.ndarray:
    array = np.asarray(values, dtype=np.float64).reshape(-1)
    if array.size == 0:
        raise MetricError(f"{name} is empty")
    return array


def average_precision(scores: ScoreList, labels: Sequence[int]) -> float:
    """
    Area under the precision-recall curve by descending-score sweep.

    Equal scores form one threshold group.

    Args:
        scores: Detection scores
        labels: 1 for positives (encrypted-real), 0 for negatives

    Returns:
        AP in [0, 1]

    Raises:
        MetricError: If the input is empty, mismatched or single-class
    """
    score_array = _as_array(scores, "scores")
    label_array = np.asarray(labels, dtype=np.int64).reshape(-1)
    if score_array.shape != label_array.shape:
        raise MetricError(f"Got {score_array.size} scores for {label_array.size} labels")
    if len(np.unique(label_array)) < 2:
        raise MetricError("Average precision needs both positive and negative labels")
    return float(average_precision_score(label_array, score_array))


def precision_recall(scores: ScoreList, labels: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Precision and recall arrays for plotting."""
    precision, recall, _ = precision_recall_curve(
        np.asarray(labels, dtype=np.int64), _as_array(scores, "scores")
    )
    return precision, recall


def calibrate_threshold(real_scores: ScoreList, far_target: float) -> float:
    """
    Largest threshold, chosen among the real scores, such that the fraction
    of real scores strictly below it is at most ``far_target``.

    Args:
        real_scores: Scores of encrypted-real images
        far_target: Allowed false alarm rate, 0 < far_target < 1

    Returns:
        Threshold t; images scoring below t are flagged as manipulated
    """
    if not 0.0 < far_target < 1.0:
        raise MetricError(f"FAR target must be in (0, 1), got {far_target}")
    ordered = np.sort(_as_array(real_scores, "real_scores"))
    allowed = int(math.floor(far_target * ordered.size + 1e-9))
    return float(ordered[min(allowed, ordered.size - 1)])


def false_alarm_rate(real_scores: ScoreList, threshold: float) -> float:
    """Fraction of real scores strictly below ``threshold``."""
    return float(np.mean(_as_array(real_scores, "real_scores") < threshold))


def tdr_at_far(real_scores: ScoreList, fake_scores: ScoreList, far: float) -> float:
    """
    True detection rate of manipulated images at a calibrated threshold.

    Returns:
        Fraction of fake scores strictly below calibrate_threshold(real, far)
    """
    fake_array = _as_array(fake_scores, "fake_scores")
    threshold = calibrate_threshold(real_scores, far)
    return float(np.mean(fake_array < threshold))


def psnr(a: torch.Tensor, b: torch.Tensor) -> float:
    """
    Peak signal-to-noise ratio in dB for peak value 1.0.

    Returns:
        10 * log10(1 / MSE); ``math.inf`` for identical images
    """
    if a.shape != b.shape:
        raise ShapeError(f"PSNR needs matching shapes, got {tuple(a.shape)} and {tuple(b.shape)}")
    mse = float(torch.mean((a.detach().to(torch.float64) - b.detach().to(torch.float64)) ** 2))
    if mse == 0.0:
        return math.inf
    return 10.0 * math.log10(1.0 / mse)
