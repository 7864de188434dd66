"""
Tests for the frozen manipulators and their registry.
"""

import pytest
import torch

from src.core import ShapeError, UnknownManipulatorError
from src.manipulators import (
    MANIPULATORS,
    get_manipulator,
    list_manipulators,
    make_manipulator,
)


class TestRegistry:
    """Lookup by kind."""

    def test_list(self):
        assert list_manipulators() == ["fixed_conv", "masked_inpaint", "color_warp"]

    def test_unknown_kind(self):
        with pytest.raises(UnknownManipulatorError, match="Unknown manipulator"):
            make_manipulator("stylegan", seed=1)

    def test_from_spec(self, tiny_side):
        manipulator = get_manipulator({"kind": "color_warp", "seed": 3}, image_side=tiny_side)
        assert manipulator.name == "color_warp"
        assert manipulator.describe() == {"kind": "color_warp", "seed": 3, "options": {}}


@pytest.mark.parametrize("kind", list(MANIPULATORS))
class TestEveryManipulator:
    """Behavior shared by every registered kind."""

    def test_same_seed_same_output(self, kind, random_images, tiny_side):
        a = make_manipulator(kind, seed=7, image_side=tiny_side)
        b = make_manipulator(kind, seed=7, image_side=tiny_side)
        assert a.checksum() == b.checksum()
        assert torch.equal(a.manipulate(random_images), b.manipulate(random_images))

    def test_different_seed_different_parameters(self, kind, tiny_side):
        a = make_manipulator(kind, seed=7, image_side=tiny_side)
        b = make_manipulator(kind, seed=8, image_side=tiny_side)
        assert a.checksum() != b.checksum()

    def test_shape_preserved(self, kind, random_images, tiny_side):
        manipulator = make_manipulator(kind, seed=1, image_side=tiny_side)
        assert manipulator.manipulate(random_images).shape == random_images.shape
        assert manipulator.manipulate(random_images[0]).shape == random_images[0].shape

    def test_frozen_but_differentiable(self, kind, random_images, tiny_side):
        manipulator = make_manipulator(kind, seed=1, image_side=tiny_side)
        before = manipulator.checksum()
        images = random_images.clone().requires_grad_()
        manipulator.manipulate(images).sum().backward()

        assert images.grad is not None
        assert all(not p.requires_grad for p in manipulator.parameters())
        assert manipulator.checksum() == before

    def test_input_gradient_matches_finite_differences(self, kind, tiny_side):
        manipulator = make_manipulator(kind, seed=1, image_side=tiny_side).double()
        images = torch.rand(2, 3, tiny_side, tiny_side, generator=torch.Generator().manual_seed(5), dtype=torch.float64)
        images.requires_grad_()
        assert torch.autograd.gradcheck(manipulator.manipulate, (images,), eps=1e-6, atol=1e-3, rtol=1e-3, fast_mode=True)

    def test_wrong_side(self, kind, random_images):
        manipulator = make_manipulator(kind, seed=1, image_side=32)
        with pytest.raises(ShapeError):
            manipulator.manipulate(random_images)


class TestFixedConv:
    """Residual convolution stack."""

    def test_zero_scale_is_identity(self, random_images, tiny_side):
        manipulator = make_manipulator("fixed_conv", seed=1, image_side=tiny_side, weight_scale=0.0)
        assert torch.allclose(manipulator.manipulate(random_images), random_images)

    def test_changes_images(self, random_images, tiny_side):
        manipulator = make_manipulator("fixed_conv", seed=1, image_side=tiny_side)
        assert not torch.allclose(manipulator.manipulate(random_images), random_images)


class TestMaskedInpaint:
    """Pixels outside the mask are untouched."""

    def test_outside_mask_unchanged(self, random_images, tiny_side):
        manipulator = make_manipulator("masked_inpaint", seed=2, image_side=tiny_side, mask_size=4)
        outside = manipulator.mask[0, 0] == 0
        result = manipulator.manipulate(random_images)
        assert torch.equal(result[..., outside], random_images[..., outside])

    def test_mask_size_clipped(self, tiny_side):
        manipulator = make_manipulator("masked_inpaint", seed=2, image_side=tiny_side, mask_size=100)
        top, left, size = manipulator.mask_box
        assert size == tiny_side // 2
        assert 0 <= top <= tiny_side - size
        assert 0 <= left <= tiny_side - size


class TestColorWarp:
    """Color matrix and bounded warp."""

    @staticmethod
    def _displacement(manipulator, side):
        ys, xs = torch.meshgrid(torch.linspace(-1.0, 1.0, side), torch.linspace(-1.0, 1.0, side), indexing="ij")
        base = torch.stack([xs, ys], dim=-1)
        return (manipulator.grid[0] - base) * (side - 1) / 2.0

    @pytest.mark.parametrize("side", [16, 128])
    def test_displacement_vectors_bounded(self, side):
        for seed in range(20):
            manipulator = make_manipulator("color_warp", seed=seed, image_side=side)
            lengths = self._displacement(manipulator, side).norm(dim=-1)
            assert float(lengths.max()) <= 3.0 + 1e-4
            assert float(lengths.max()) == pytest.approx(3.0, abs=1e-4)

    def test_zero_displacement_keeps_geometry(self, random_images, tiny_side):
        manipulator = make_manipulator("color_warp", seed=1, image_side=tiny_side, max_displacement=0.0)
        expected = torch.einsum("ck,bkhw->bchw", manipulator.color_matrix, random_images)
        assert torch.allclose(manipulator.manipulate(random_images), expected)
