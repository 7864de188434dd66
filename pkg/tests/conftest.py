"""
Shared fixtures: tiny 16x16 corpora and a one-epoch training config.
"""

import sys
from pathlib import Path

import pytest
import torch

sys.path.insert(0, str(Path(__file__).parent.parent))

from src.core.rng import make_rng
from src.data import ImageCorpus, ImageRecord, SyntheticCorpus
from src.templates import init_template_set
from src.training import CorpusConfig, TrainConfig

TINY_SIDE = 16


@pytest.fixture
def tiny_side():
    return TINY_SIDE


@pytest.fixture
def tiny_config():
    """One epoch over 8 images at 16x16; finishes in seconds on CPU."""
    return TrainConfig(
        seed=1,
        manipulator={"kind": "fixed_conv", "seed": 7},
        n=3,
        strength=0.3,
        k=8,
        learning_rate=1e-4,
        batch_size=4,
        epochs=1,
        image_side=TINY_SIDE,
        corpus=CorpusConfig(train_size=8, test_size=6),
    )


@pytest.fixture
def tiny_corpus():
    return SyntheticCorpus(seed=1, side=TINY_SIDE).build("train", 8)


@pytest.fixture
def tiny_test_corpus():
    return SyntheticCorpus(seed=1, side=TINY_SIDE).build("test", 6)


@pytest.fixture
def tiny_templates():
    return init_template_set(3, TINY_SIDE, make_rng(5))


@pytest.fixture
def random_images():
    """Four random images (4, 3, 16, 16) in [0, 1)."""
    generator = torch.Generator().manual_seed(0)
    return torch.rand(4, 3, TINY_SIDE, TINY_SIDE, generator=generator)


@pytest.fixture
def empty_corpus():
    return ImageCorpus([], name="empty")


@pytest.fixture
def make_corpus():
    """Build a corpus from a tensor batch."""
    def _make(images, label=1, name="batch"):
        return ImageCorpus(
            [ImageRecord(id=f"img_{i}", image=image, label=label) for i, image in enumerate(images)],
            name=name,
        )
    return _make


@pytest.fixture
def minimal_config_path():
    return Path(__file__).parent.parent / "configs" / "minimal.json"
