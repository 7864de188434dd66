"""
Tests for the template-learning losses and detection objectives.
"""

import math

import pytest
import torch

from src.core import FrequencyFilter, LossWeights, ShapeError
from src.losses import (
    SCORE_EPSILON,
    content_loss,
    detection_objective,
    lowpass_energy,
    magnitude_loss,
    pairwise_set_loss,
    passive_cross_entropy,
    recovery_loss,
    separation_loss,
    total_loss,
)


def _checkerboard(side: int) -> torch.Tensor:
    rows = torch.arange(side).view(-1, 1)
    cols = torch.arange(side).view(1, -1)
    return ((-1.0) ** (rows + cols)).to(torch.float64)


class TestHandValues:
    """Closed-form values of each loss."""

    def test_magnitude_of_constant_plane(self):
        assert float(magnitude_loss(torch.full((128, 128), 0.5))) == pytest.approx(4096.0)

    def test_magnitude_batched(self):
        values = magnitude_loss(torch.ones(2, 4, 4))
        assert values.shape == (2,)
        assert values.tolist() == [16.0, 16.0]

    def test_recovery_of_itself_is_zero(self):
        plane = torch.rand(8, 8, dtype=torch.float64)
        assert float(recovery_loss(plane, plane)) == pytest.approx(0.0, abs=1e-12)

    def test_recovery_of_negation_is_two(self):
        plane = torch.rand(8, 8, dtype=torch.float64) + 0.1
        assert float(recovery_loss(plane, -plane)) == pytest.approx(2.0, abs=1e-12)

    def test_checkerboard_has_no_low_frequency_energy(self):
        assert float(content_loss(_checkerboard(16), FrequencyFilter(k=8))) == pytest.approx(0.0, abs=1e-8)

    def test_constant_plane_energy_is_dc(self):
        plane = torch.ones(16, 16, dtype=torch.float64)
        assert float(lowpass_energy(plane, FrequencyFilter(k=1))) == pytest.approx(256.0 ** 2)

    def test_full_window_matches_parseval(self):
        plane = torch.rand(16, 16, dtype=torch.float64)
        energy = float(lowpass_energy(plane, FrequencyFilter(k=16)))
        assert energy == pytest.approx(256.0 * float((plane ** 2).sum()), rel=1e-9)

    def test_window_larger_than_plane(self):
        with pytest.raises(ShapeError):
            content_loss(torch.rand(8, 8), FrequencyFilter(k=9))

    def test_pairwise_single_template_is_zero(self):
        assert float(pairwise_set_loss(torch.rand(1, 8, 8))) == 0.0

    def test_pairwise_identical_templates(self):
        plane = torch.rand(8, 8, dtype=torch.float64)
        # three pairs, each with cosine 1
        assert float(pairwise_set_loss(torch.stack([plane, plane, plane]))) == pytest.approx(3.0)

    def test_separation_picks_most_similar(self):
        base = torch.rand(8, 8, dtype=torch.float64)
        templates = torch.stack([torch.rand(8, 8, dtype=torch.float64), base])
        value, index = separation_loss(templates, base, return_index=True)
        assert int(index) == 1
        assert float(value) == pytest.approx(1.0)

    def test_separation_batched(self):
        values = separation_loss(torch.rand(3, 8, 8), torch.rand(5, 8, 8))
        assert values.shape == (5,)


class TestGradients:
    """Every loss is differentiable in float64."""

    @pytest.fixture
    def plane(self):
        generator = torch.Generator().manual_seed(3)
        return torch.rand(8, 8, dtype=torch.float64, generator=generator).requires_grad_()

    @pytest.fixture
    def other(self):
        generator = torch.Generator().manual_seed(4)
        return torch.rand(8, 8, dtype=torch.float64, generator=generator)

    def test_magnitude(self, plane):
        assert torch.autograd.gradcheck(magnitude_loss, (plane,))

    def test_recovery(self, plane, other):
        assert torch.autograd.gradcheck(lambda p: recovery_loss(p, other), (plane,))

    def test_content(self, plane):
        assert torch.autograd.gradcheck(lambda p: content_loss(p, FrequencyFilter(k=4)), (plane,))

    def test_separation(self, plane, other):
        templates = torch.stack([other, other.flip(0)])
        assert torch.autograd.gradcheck(lambda p: separation_loss(templates, p), (plane,))

    def test_pairwise(self, plane, other):
        assert torch.autograd.gradcheck(lambda p: pairwise_set_loss(torch.stack([p, other])), (plane,))

    def test_total(self, plane, other):
        recovered_real = other.clone()
        recovered_fake = other.flip(1).clone()

        def objective(templates):
            return total_loss(
                templates,
                templates[0],
                recovered_real,
                recovered_fake,
                LossWeights(),
                FrequencyFilter(k=4),
            ).total

        templates = torch.stack([plane.detach(), other.flip(0)]).requires_grad_()
        assert torch.autograd.gradcheck(objective, (templates,))


class TestTotalLoss:
    """Weighted sum bookkeeping."""

    def test_recombine_matches_total(self, tiny_templates):
        planes = tiny_templates.planes
        breakdown = total_loss(
            planes,
            planes[torch.tensor([0, 2])],
            torch.rand(2, 16, 16),
            torch.rand(2, 16, 16),
            LossWeights(),
            FrequencyFilter(k=8),
        )
        assert breakdown.recombine() == pytest.approx(float(breakdown.total), rel=1e-5)

    def test_to_dict_keys(self, tiny_templates):
        planes = tiny_templates.planes
        breakdown = total_loss(planes, planes[0], planes[1], planes[2], LossWeights(), FrequencyFilter(k=8))
        assert set(breakdown.to_dict()) == {"J_m", "J_r", "J_c", "J_s", "J_p", "total"}

    def test_zero_weights_give_zero_total(self, tiny_templates):
        planes = tiny_templates.planes
        weights = LossWeights().without("J_m", "J_r", "J_c", "J_s", "J_p")
        breakdown = total_loss(planes, planes[0], planes[1], planes[2], weights, FrequencyFilter(k=8))
        assert float(breakdown.total) == 0.0


class TestDetectionObjective:
    """Clamped binary cross-entropy on max-cosine scores."""

    def test_perfect_scores(self):
        loss = detection_objective([1.0, 0.0], [1, 0])
        assert float(loss) == pytest.approx(-math.log(1.0 - SCORE_EPSILON), abs=1e-6)

    def test_half_score(self):
        assert float(detection_objective([0.5], [1])) == pytest.approx(math.log(2.0), rel=1e-5)

    def test_negative_cosine_clamps(self):
        loss = detection_objective([-0.7], [1])
        assert float(loss) == pytest.approx(-math.log(SCORE_EPSILON), rel=1e-4)

    def test_length_mismatch(self):
        with pytest.raises(ShapeError):
            detection_objective([0.1, 0.2], [1])

    def test_empty(self):
        with pytest.raises(ShapeError):
            detection_objective([], [])

    def test_passive_cross_entropy(self):
        logits = torch.tensor([[0.0, 10.0], [10.0, 0.0]])
        assert float(passive_cross_entropy(logits, [1, 0])) < 1e-3


class TestLossProperties:
    """Invariances and monotonicity of the loss terms."""

    @pytest.fixture
    def planes(self):
        generator = torch.Generator().manual_seed(21)
        return torch.rand(3, 16, 16, generator=generator, dtype=torch.float64)

    @pytest.fixture
    def fake(self):
        generator = torch.Generator().manual_seed(22)
        return torch.randn(16, 16, generator=generator, dtype=torch.float64)

    @pytest.mark.parametrize("scale", [0.01, 3.0, 250.0])
    def test_recovery_is_scale_invariant(self, planes, fake, scale):
        assert float(recovery_loss(planes[0], scale * fake)) == pytest.approx(float(recovery_loss(planes[0], fake)), abs=1e-12)

    def test_recovery_of_orthogonal_plane_is_one(self, planes, fake):
        template = planes[0]
        orthogonal = fake - (fake * template).sum() / (template * template).sum() * template
        assert float(recovery_loss(template, orthogonal)) == pytest.approx(1.0, abs=1e-12)

    def test_pairwise_is_permutation_invariant(self, planes):
        expected = float(pairwise_set_loss(planes))
        for order in ([2, 0, 1], [1, 2, 0], [2, 1, 0]):
            assert float(pairwise_set_loss(planes[order])) == pytest.approx(expected, abs=1e-12)

    def test_set_losses_are_affine_invariant(self, planes, fake):
        moved = planes.clone()
        moved[1] = 4.0 * moved[1] + 2.0
        moved[2] = 0.5 * moved[2] - 9.0

        assert float(pairwise_set_loss(moved)) == pytest.approx(float(pairwise_set_loss(planes)), abs=1e-9)
        assert float(separation_loss(moved, fake)) == pytest.approx(float(separation_loss(planes, fake)), abs=1e-9)
        assert float(separation_loss(planes, 3.0 * fake + 1.0)) == pytest.approx(
            float(separation_loss(planes, fake)), abs=1e-9
        )

    def test_lowpass_energy_grows_with_window(self, planes):
        energies = [float(lowpass_energy(planes[0], FrequencyFilter(k=k))) for k in range(1, 17)]
        assert all(later >= earlier * (1 - 1e-12) for earlier, later in zip(energies, energies[1:]))

    def test_lowpass_energy_of_ones(self):
        plane = torch.ones(4, 4, dtype=torch.float64)
        assert float(lowpass_energy(plane, FrequencyFilter(k=2))) == pytest.approx(256.0, abs=1e-9)

    def test_detection_objective_monotone_in_score(self):
        scores = torch.linspace(0.05, 0.95, 10, dtype=torch.float64)
        real = [float(detection_objective(s.view(1), torch.ones(1))) for s in scores]
        fake = [float(detection_objective(s.view(1), torch.zeros(1))) for s in scores]
        assert all(a > b for a, b in zip(real, real[1:]))
        assert all(a < b for a, b in zip(fake, fake[1:]))
