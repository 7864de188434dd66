"""
Recovery encoder, passive classifier and their weights format.
"""

from .encoder import RecoveryEncoder, encoder_forward
from .classifier import PassiveClassifier, classifier_forward, real_probability
from .init import init_encoder, init_classifier, initialize_parameters
from .weights import encode_weights, decode_weights, save_weights, load_weights

__all__ = [
    "RecoveryEncoder",
    "encoder_forward",
    "PassiveClassifier",
    "classifier_forward",
    "real_probability",
    "init_encoder",
    "init_classifier",
    "initialize_parameters",
    "encode_weights",
    "decode_weights",
    "save_weights",
    "load_weights",
]
