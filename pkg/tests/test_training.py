"""
Tests for the trainer, its config and the ablation/baseline variants.
"""

import json
import math

import pytest
import torch

from src.core import ConfigurationError, DivergenceError, EmptyCorpusError, LossWeights, make_rng
from src.data import SyntheticCorpus
from src.models import encode_weights
from src.training import (
    AdversarialAttack,
    CorpusConfig,
    TrainConfig,
    TrainLog,
    Trainer,
    remove_loss_variant,
    train,
    train_adversarial_baseline,
    train_fixed_template,
    train_passive_classifier,
)
from src.training.trainer import DIVERGENCE_FACTOR, check_divergence

STEP_KEYS = {"step", "epoch", "J_m", "J_r", "J_c", "J_s", "J_p", "total", "detection", "objective", "template_indices"}


class TestTrainConfig:
    """Parsing and validation."""

    def test_defaults(self):
        cfg = TrainConfig(seed=1, manipulator={"kind": "fixed_conv", "seed": 1})
        assert (cfg.n, cfg.strength, cfg.k, cfg.batch_size, cfg.epochs) == (3, 0.3, 50, 4, 10)
        assert cfg.learning_rate == 1e-5
        assert cfg.weights == LossWeights()

    def test_from_json(self, minimal_config_path):
        cfg = TrainConfig.from_json(minimal_config_path)
        assert cfg.image_side == 16
        assert cfg.corpus.train_size == 8

    def test_missing_field(self):
        with pytest.raises(ConfigurationError, match="Missing required config field"):
            TrainConfig.from_dict({"seed": 1})

    def test_unknown_field(self):
        with pytest.raises(ConfigurationError, match="Unknown config field"):
            TrainConfig.from_dict({"seed": 1, "manipulator": {"kind": "fixed_conv"}, "lr": 0.1})

    @pytest.mark.parametrize("changes", [
        {"n": 0},
        {"strength": 1.5},
        {"k": 17},
        {"learning_rate": -1.0},
        {"optimizer": "sgd"},
        {"far": 0.0},
        {"manipulator": {"kind": "stylegan", "seed": 1}},
        {"augmentation": [{"name": "sharpen"}]},
    ])
    def test_invalid_values(self, tiny_config, changes):
        with pytest.raises(ConfigurationError):
            tiny_config.with_overrides(**changes)

    def test_bad_weights(self):
        with pytest.raises(ConfigurationError):
            TrainConfig.from_dict({
                "seed": 1, "manipulator": {"kind": "fixed_conv"}, "weights": {"lambda1": -1.0},
            })

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError, match="not found"):
            TrainConfig.from_json(tmp_path / "none.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(ConfigurationError):
            TrainConfig.from_json(path)

    def test_hash_is_stable_and_sensitive(self, tiny_config):
        assert tiny_config.config_hash() == tiny_config.with_overrides().config_hash()
        assert tiny_config.config_hash() != tiny_config.with_overrides(n=4).config_hash()
        assert len(tiny_config.short_hash()) == 12

    def test_save_round_trip(self, tmp_path, tiny_config):
        path = tiny_config.save(tmp_path / "cfg.json")
        assert TrainConfig.from_json(path).config_hash() == tiny_config.config_hash()

    def test_unseen_manipulators_default(self, tiny_config):
        kinds = [spec["kind"] for spec in tiny_config.unseen_manipulators()]
        assert kinds == ["masked_inpaint", "color_warp"]

    def test_corpus_seed_override(self, tiny_config):
        assert tiny_config.corpus_seed == 1
        cfg = tiny_config.with_overrides(corpus=CorpusConfig(train_size=8, test_size=6, seed=42))
        assert cfg.corpus_seed == 42


class TestTrainer:
    """Joint optimization."""

    def test_log_records(self, tiny_config, tiny_corpus):
        result = train(tiny_config, tiny_corpus)
        assert len(result.log.steps) == 2
        assert set(result.log.steps[0]) == STEP_KEYS
        assert len(result.log.epochs) == 1
        assert result.log.epochs[0]["manipulator_checksum"] == result.manipulator.checksum()

    def test_recorded_total_recombines(self, tiny_config, tiny_corpus):
        weights = tiny_config.weights
        for record in train(tiny_config, tiny_corpus).log.steps:
            recombined = sum(weights.for_loss(name) * record[name] for name in ("J_m", "J_r", "J_c", "J_s", "J_p"))
            assert record["total"] == pytest.approx(recombined, rel=1e-4)
            assert record["objective"] == pytest.approx(record["total"] + record["detection"], rel=1e-4)

    def test_deterministic(self, tiny_config, tiny_corpus):
        a = train(tiny_config, tiny_corpus)
        b = train(tiny_config, tiny_corpus)
        assert a.templates.checksum() == b.templates.checksum()
        assert encode_weights(a.encoder) == encode_weights(b.encoder)
        assert a.log.steps == b.log.steps

    def test_templates_move(self, tiny_config, tiny_corpus):
        result = train(tiny_config, tiny_corpus)
        assert result.templates.checksum() != result.initial_templates.checksum()

    def test_zero_learning_rate_keeps_parameters(self, tiny_config, tiny_corpus):
        trainer = Trainer(tiny_config.with_overrides(learning_rate=0.0), tiny_corpus)
        before = [p.detach().clone() for p in trainer.encoder.parameters()]
        result = trainer.run()

        assert result.templates.checksum() == result.initial_templates.checksum()
        for old, new in zip(before, result.encoder.parameters()):
            assert torch.equal(old, new)

    def test_single_template(self, tiny_config, tiny_corpus):
        result = train(tiny_config.with_overrides(n=1), tiny_corpus)
        assert all(record["J_p"] == 0.0 for record in result.log.steps)
        assert result.log.epochs[0]["pairwise_mean"] == 0.0

    def test_template_indices_in_range(self, tiny_config, tiny_corpus):
        result = train(tiny_config, tiny_corpus)
        indices = [i for record in result.log.steps for i in record["template_indices"]]
        assert len(indices) == 8
        assert all(0 <= i < 3 for i in indices)

    def test_callbacks(self, tiny_config, tiny_corpus):
        steps, epochs = [], []
        train(tiny_config, tiny_corpus, on_step=steps.append, on_epoch=epochs.append)
        assert len(steps) == 2
        assert len(epochs) == 1

    def test_with_augmentation(self, tiny_config, tiny_corpus):
        cfg = tiny_config.with_overrides(augmentation=[{"name": "gaussian_noise", "probability": 1.0}])
        assert len(train(cfg, tiny_corpus).log.steps) == 2

    def test_sidecar(self, tiny_config, tiny_corpus):
        sidecar = train(tiny_config, tiny_corpus).sidecar()
        assert sidecar["config_hash"] == tiny_config.config_hash()
        assert sidecar["config"]["strength"] == 0.3
        json.dumps(sidecar)

    def test_empty_corpus(self, tiny_config, empty_corpus):
        with pytest.raises(EmptyCorpusError):
            Trainer(tiny_config, empty_corpus)

    def test_corpus_side_mismatch(self, tiny_config):
        corpus = SyntheticCorpus(seed=1, side=8).build("train", 4)
        with pytest.raises(ValueError):
            Trainer(tiny_config, corpus)

    def test_divergence_check(self):
        with pytest.raises(DivergenceError) as info:
            check_divergence(torch.tensor(float("nan")), step=3, reference=1.0)
        assert info.value.step == 3
        with pytest.raises(DivergenceError):
            check_divergence(torch.tensor(float("inf")), step=0)
        with pytest.raises(DivergenceError):
            check_divergence(torch.tensor(4e14), step=5, reference=3e8)
        assert check_divergence(torch.tensor(3.5e8), step=0) == pytest.approx(3.5e8)

    def test_reference_floor(self):
        # a tiny first loss still allows growth up to the factor
        assert check_divergence(torch.tensor(9e5), step=1, reference=1e-3) == pytest.approx(9e5)
        with pytest.raises(DivergenceError):
            check_divergence(torch.tensor(2e6), step=1, reference=1e-3)

    def test_default_setup_takes_a_step(self):
        cfg = TrainConfig(seed=1, manipulator={"kind": "fixed_conv", "seed": 7}, epochs=1)
        corpus = SyntheticCorpus(seed=1).build("train", cfg.batch_size)
        result = train(cfg, corpus)

        (record,) = result.log.steps
        # large at 128 by construction, not a divergence
        assert record["total"] > DIVERGENCE_FACTOR
        assert all(math.isfinite(record[name]) for name in ("J_m", "J_r", "J_c", "J_s", "J_p", "objective"))
        assert result.templates.checksum() != result.initial_templates.checksum()

    def test_log_jsonl_round_trip(self, tmp_path, tiny_config, tiny_corpus):
        log = train(tiny_config, tiny_corpus).log
        restored = TrainLog.from_jsonl(log.to_jsonl(tmp_path / "log.jsonl"))
        assert restored.steps == log.steps
        assert restored.config_hash == log.config_hash
        assert len(log.epoch_means("total")) == 1


class TestVariants:
    """Ablations and baselines."""

    def test_fixed_template(self, tiny_config, tiny_corpus):
        result = train_fixed_template(tiny_config, tiny_corpus)
        assert result.templates.checksum() == result.initial_templates.checksum()
        assert result.config.variant == "fixed_template"
        assert result.config.weights.lambda1 == 0.0

    def test_remove_loss(self, tiny_config, tiny_corpus):
        result = remove_loss_variant(tiny_config, tiny_corpus, "j_c")
        assert result.config.variant == "remove_J_c"
        assert result.config.weights.lambda3 == 0.0
        assert result.config.weights.lambda2 == 30.0

    def test_remove_unknown_loss(self, tiny_config, tiny_corpus):
        with pytest.raises(ValueError):
            remove_loss_variant(tiny_config, tiny_corpus, "J_x")

    @pytest.mark.parametrize("attack,steps", [("fgsm", 1), ("pgd", 3)])
    def test_adversarial_budget(self, tiny_config, tiny_corpus, attack, steps):
        result = train_adversarial_baseline(tiny_config, tiny_corpus, attack=attack, epsilon=0.03, steps=steps)
        drift = (result.templates.planes - result.initial_templates.planes).abs().max()
        assert float(drift) <= 0.03 + 1e-6
        assert float(drift) > 0.0

    def test_fgsm_single_step(self):
        with pytest.raises(ValueError):
            AdversarialAttack(method="fgsm", epsilon=0.03, steps=2)

    def test_attack_step_size(self):
        assert AdversarialAttack("fgsm", 0.03).step_size == pytest.approx(0.03)
        assert AdversarialAttack("pgd", 0.03, steps=10).step_size == pytest.approx(0.0075)

    def test_bad_epsilon(self):
        with pytest.raises(ValueError):
            AdversarialAttack("pgd", 0.0, steps=2)

    def test_passive_classifier(self, tiny_config, tiny_corpus):
        result = train_passive_classifier(tiny_config, tiny_corpus)
        assert result.classifier is not None
        assert result.encoder is None
        assert set(result.log.steps[0]) == {"step", "epoch", "cross_entropy", "total"}


@pytest.mark.slow
class TestDeskScale:
    """Default 128x128 setup on a reduced corpus."""

    def test_one_epoch_at_full_resolution(self):
        cfg = TrainConfig(
            seed=1,
            manipulator={"kind": "fixed_conv", "seed": 7},
            epochs=1,
            corpus=CorpusConfig(train_size=16, test_size=8),
        )
        corpus = SyntheticCorpus(seed=1).build("train", 16)
        result = train(cfg, corpus)
        assert result.templates.planes.shape == (3, 128, 128)
        assert len(result.log.steps) == 4
