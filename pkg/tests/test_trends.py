"""
End-to-end trends on reduced studies, the desk config and scoring latency.
"""

from pathlib import Path

import pytest

from src.benchmark import StudyRunner
from src.core import make_rng
from src.data import SyntheticCorpus
from src.detection import measure_latency
from src.models import init_encoder
from src.templates import init_template_set
from src.training import CorpusConfig, TrainConfig, train

DESK_CONFIG = Path(__file__).resolve().parent.parent / "configs" / "desk.json"
SEEDS = [1, 2, 3]


def _seen(result):
    frame = result.to_frame()
    return frame[frame["seen"]]


def _unseen_medians(result, variant):
    frame = result.to_frame()
    frame = frame[(frame["variant"] == variant) & ~frame["seen"]]
    return frame.groupby("manipulator")["ap"].median()


class TestStrengthPsnr:
    """PSNR against the original falls as the template gets stronger."""

    def test_psnr_strictly_decreasing(self, tiny_config):
        result = StudyRunner(tiny_config, max_workers=2).run("strength")
        seen = _seen(result)
        assert seen["strength"].tolist() == [0.1, 0.3, 0.5, 1.0]
        psnrs = seen["psnr"].tolist()
        assert all(a > b for a, b in zip(psnrs, psnrs[1:]))


class TestLatency:
    """Per-image scoring time."""

    def test_twenty_templates_at_full_resolution(self):
        encoder = init_encoder(make_rng(1), 128)
        templates = init_template_set(20, 128, make_rng(2))
        images = SyntheticCorpus(seed=1).build("test", 8)
        assert measure_latency(encoder, templates, images) <= 100.0


@pytest.fixture(scope="module")
def reduced_runner():
    """Desk defaults at 64x64 on a smaller corpus, shared across studies."""
    config = TrainConfig.from_json(DESK_CONFIG).with_overrides(
        image_side=64,
        k=25,
        epochs=3,
        corpus=CorpusConfig(train_size=64, test_size=32),
    )
    return StudyRunner(config, seeds=SEEDS, max_workers=2)


@pytest.mark.slow
class TestReducedStudies:
    """Study trends, median over three seeds."""

    def test_set_size_raises_pairwise_similarity(self, reduced_runner):
        seen = _seen(reduced_runner.run("set_size"))
        medians = seen.groupby("n")["pairwise_mean"].median()
        assert medians[1] <= medians[3] <= medians[10]

    def test_strength_trend(self, reduced_runner):
        seen = _seen(reduced_runner.run("strength"))
        for _, group in seen.groupby("seed"):
            group = group.sort_values("strength")
            psnrs, aps = group["psnr"].tolist(), group["ap"].tolist()
            assert all(a > b for a, b in zip(psnrs, psnrs[1:]))
            assert all(b >= a - 0.01 for a, b in zip(aps, aps[1:]))

    def test_fixed_templates_fall_behind_on_unseen(self, reduced_runner):
        result = reduced_runner.run("loss_removal")
        full = _unseen_medians(result, "full")
        fixed = _unseen_medians(result, "fixed_template")
        assert (fixed < full).all()

    def test_beats_passive_classifier(self, reduced_runner):
        result = reduced_runner.run("passive_baseline")
        frame = result.to_frame()
        seen_full = frame[(frame["variant"] == "full") & frame["seen"]]
        assert seen_full["ap"].median() >= 0.95

        full = _unseen_medians(result, "full")
        passive = _unseen_medians(result, "passive_classifier")
        assert ((full - passive) >= 0.05).all()

    def test_selection_dominance(self, reduced_runner):
        seen = _seen(reduced_runner.run("selection"))
        for _, group in seen.groupby("seed"):
            ap = dict(zip(group["variant"], group["ap"]))
            assert ap["best"] >= ap["random"] >= ap["worst"]


@pytest.mark.slow
class TestDeskTraining:
    """Default setup on a reduced corpus."""

    def test_recovery_loss_falls(self):
        cfg = TrainConfig.from_json(DESK_CONFIG).with_overrides(
            corpus=CorpusConfig(train_size=100, test_size=8),
        )
        corpus = SyntheticCorpus(seed=cfg.seed).build("train", cfg.corpus.train_size)
        result = train(cfg, corpus)
        means = result.log.epoch_means("J_r")
        assert len(means) == cfg.epochs
        assert means[-1] < means[0]
