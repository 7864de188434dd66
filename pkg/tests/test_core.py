"""
Tests for random streams, cosine similarity and shared types.
"""

import numpy as np
import pytest
import torch

from src.core import (
    EncryptConfig,
    FrequencyFilter,
    LossWeights,
    ShapeError,
    check_image,
    cosine,
    cosine_to_set,
    make_rng,
    max_cosine,
)
from src.core.rng import RngStream


class TestRngStream:
    """Seeded streams replay identically."""

    def test_same_seed_same_draws(self):
        a, b = make_rng(3), make_rng(3)
        assert a.random() == b.random()
        np.testing.assert_array_equal(a.uniform((4, 4)), b.uniform((4, 4)))

    def test_counter_advances(self):
        rng = make_rng(3)
        first = rng.random()
        second = rng.random()
        assert rng.counter == 2
        assert first != second

    def test_negative_seed_rejected(self):
        with pytest.raises(ValueError):
            make_rng(-1)

    def test_state_round_trip(self):
        rng = make_rng(11)
        rng.random()
        restored = RngStream.from_dict(rng.to_dict())
        assert restored.random() == rng.random()

    def test_spawn_ignores_parent_counter(self):
        parent = make_rng(5)
        child_before = parent.spawn(2, 7)
        parent.random()
        child_after = parent.spawn(2, 7)
        assert child_before.seed == child_after.seed

    def test_spawn_tags_differ(self):
        parent = make_rng(5)
        assert parent.spawn(0).seed != parent.spawn(1).seed

    def test_integers_range(self):
        rng = make_rng(2)
        values = [rng.integers(0, 3) for _ in range(50)]
        assert set(values) <= {0, 1, 2}

    def test_torch_generator_is_seeded(self):
        a = torch.randn(5, generator=make_rng(9).torch_generator())
        b = torch.randn(5, generator=make_rng(9).torch_generator())
        assert torch.equal(a, b)


class TestCosine:
    """Cosine similarity on planes."""

    def test_identical_planes(self):
        plane = torch.rand(8, 8)
        assert float(cosine(plane, plane)) == pytest.approx(1.0, abs=1e-6)

    def test_opposite_planes(self):
        plane = torch.rand(8, 8) + 0.1
        assert float(cosine(plane, -plane)) == pytest.approx(-1.0, abs=1e-6)

    def test_zero_norm_is_zero(self):
        assert float(cosine(torch.zeros(4, 4), torch.rand(4, 4))) == 0.0

    def test_zero_norm_gradient_is_finite(self):
        plane = torch.zeros(4, 4, requires_grad=True)
        cosine(plane, torch.rand(4, 4)).backward()
        assert torch.isfinite(plane.grad).all()

    def test_cosine_to_set_shapes(self):
        templates = torch.rand(3, 8, 8)
        assert cosine_to_set(torch.rand(8, 8), templates).shape == (3,)
        assert cosine_to_set(torch.rand(5, 8, 8), templates).shape == (5, 3)

    def test_max_cosine_ties_pick_lowest_index(self):
        plane = torch.rand(8, 8)
        templates = torch.stack([plane, plane, -plane])
        score, index = max_cosine(plane, templates)
        assert int(index) == 0
        assert float(score) == pytest.approx(1.0, abs=1e-6)


class TestTypes:
    """Value objects validate on construction."""

    def test_default_loss_weights(self):
        weights = LossWeights()
        assert weights.to_dict() == {
            "lambda1": 100.0, "lambda2": 30.0, "lambda3": 5.0, "lambda4": 0.003, "lambda5": 10.0,
        }

    def test_negative_weight_rejected(self):
        with pytest.raises(ValueError):
            LossWeights(lambda3=-1.0)

    def test_without_zeroes_named_losses(self):
        weights = LossWeights().without("J_m", "j_p")
        assert weights.lambda1 == 0.0
        assert weights.lambda5 == 0.0
        assert weights.lambda2 == 30.0

    def test_unknown_loss_name(self):
        with pytest.raises(ValueError, match="Unknown loss"):
            LossWeights().for_loss("J_x")

    @pytest.mark.parametrize("strength", [-0.1, 1.5])
    def test_strength_out_of_range(self, strength):
        with pytest.raises(ValueError):
            EncryptConfig(strength=strength)

    def test_filter_larger_than_side(self):
        with pytest.raises(ShapeError):
            FrequencyFilter(k=50).check_side(16)

    def test_check_image_rejects_bad_shapes(self):
        with pytest.raises(ShapeError):
            check_image(torch.rand(1, 16, 16), side=16)
        with pytest.raises(ShapeError):
            check_image(torch.rand(3, 16, 8), side=None)
        with pytest.raises(ShapeError):
            check_image(torch.rand(3, 16, 16), side=128)

    def test_check_image_rejects_nan(self):
        image = torch.rand(3, 16, 16)
        image[0, 0, 0] = float("nan")
        with pytest.raises(ShapeError):
            check_image(image, side=16)
