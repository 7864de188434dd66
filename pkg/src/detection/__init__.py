"""
Max-cosine detection, evaluation and template-selection studies.
"""

from .scoring import ScoreRow, Recoverer, recover, score_image, score_dataset
from .report import CSV_COLUMNS, DetectionReport, DetectionCollector
from .selection import (
    SelectionTable,
    SelectionResult,
    BiasOneResult,
    selection_table,
    selection_best_worst_oracle,
    selection_bias_one,
)
from .evaluate import (
    EvaluationSet,
    export_encrypt_config,
    build_evaluation_set,
    evaluate_detector,
    evaluate_classifier,
    measure_latency,
)

__all__ = [
    "ScoreRow",
    "Recoverer",
    "recover",
    "score_image",
    "score_dataset",
    "CSV_COLUMNS",
    "DetectionReport",
    "DetectionCollector",
    "SelectionTable",
    "SelectionResult",
    "BiasOneResult",
    "selection_table",
    "selection_best_worst_oracle",
    "selection_bias_one",
    "EvaluationSet",
    "export_encrypt_config",
    "build_evaluation_set",
    "evaluate_detector",
    "evaluate_classifier",
    "measure_latency",
]
