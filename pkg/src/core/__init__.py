"""
Shared domain types, random streams, similarity and errors.
"""

from .errors import (
    ForensicsError,
    ConfigurationError,
    ShapeError,
    TemplateFormatError,
    EmptyCorpusError,
    UnknownManipulatorError,
    CodecError,
    MetricError,
    DivergenceError,
)
from .rng import RngStream, make_rng
from .similarity import cosine, cosine_to_set, max_cosine
from .types import (
    IMAGE_SIDE,
    IMAGE_CHANNELS,
    LOSS_NAMES,
    LossWeights,
    EncryptConfig,
    FrequencyFilter,
    check_image,
    check_plane,
)

__all__ = [
    "ForensicsError",
    "ConfigurationError",
    "ShapeError",
    "TemplateFormatError",
    "EmptyCorpusError",
    "UnknownManipulatorError",
    "CodecError",
    "MetricError",
    "DivergenceError",
    "RngStream",
    "make_rng",
    "cosine",
    "cosine_to_set",
    "max_cosine",
    "IMAGE_SIDE",
    "IMAGE_CHANNELS",
    "LOSS_NAMES",
    "LossWeights",
    "EncryptConfig",
    "FrequencyFilter",
    "check_image",
    "check_plane",
]
