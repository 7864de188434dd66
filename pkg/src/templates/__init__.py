"""
Template sets and their file format.
"""

from .template_set import (
    FORMAT_VERSION,
    TemplateSet,
    PairwiseStats,
    init_template_set,
    select_template,
    encrypt,
    minmax_normalize,
    pairwise_normalized_cosines,
    pairwise_cosine_stats,
)
from .storage import (
    encode_template_set,
    decode_template_set,
    save_template_set,
    load_template_set,
    sidecar_path,
)

__all__ = [
    "FORMAT_VERSION",
    "TemplateSet",
    "PairwiseStats",
    "init_template_set",
    "select_template",
    "encrypt",
    "minmax_normalize",
    "pairwise_normalized_cosines",
    "pairwise_cosine_stats",
    "encode_template_set",
    "decode_template_set",
    "save_template_set",
    "load_template_set",
    "sidecar_path",
]
