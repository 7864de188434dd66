"""
Tests for the study runner, reporter and benchmark utilities.
"""

import json

import pytest

from src.benchmark import STUDIES, Reporter, StudyResult, StudyRow, StudyRunner, get_study
from src.benchmark.utils import format_metric, get_report_subdir_name
from src.core import ConfigurationError


class TestStudyRegistry:
    """Study names."""

    def test_all_studies_registered(self):
        assert set(STUDIES) == {
            "set_size", "strength", "loss_removal", "selection",
            "augmentation", "adversarial_baseline", "passive_baseline",
        }

    def test_unknown_study(self):
        with pytest.raises(ConfigurationError, match="Unknown study"):
            get_study("resolution")

    def test_runner_rejects_unknown_study(self, tiny_config):
        with pytest.raises(ConfigurationError):
            StudyRunner(tiny_config).run("resolution")


class TestUtils:
    """Formatting helpers."""

    def test_subdir_name(self):
        assert get_report_subdir_name("set_size", "0123456789abcdef") == "set_size_0123456789ab"
        assert get_report_subdir_name("a b/c", "ff") == "a-b-c_ff"

    def test_format_metric(self):
        assert format_metric(None) == "n/a"
        assert format_metric(float("inf")) == "inf"
        assert format_metric(0.123456) == "0.1235"
        assert format_metric(True) == "True"


class TestStudyRunner:
    """Study grids on the tiny config."""

    def test_set_size(self, tiny_config):
        progress = []
        runner = StudyRunner(tiny_config, max_workers=2)
        runner.on_progress(lambda done, total, label: progress.append((done, total, label)))
        result = runner.run("set_size")

        # three sizes, each evaluated on the seen and two unseen manipulators
        assert len(result.rows) == 9
        assert [r.extra["n"] for r in result.rows[::3]] == [1, 3, 10]
        assert result.rows[0].extra["pairwise_mean"] == 0.0
        assert progress[-1][:2] == (3, 3)
        assert [r.seen for r in result.rows[:3]] == [True, False, False]

    def test_selection_variants(self, tiny_config):
        result = StudyRunner(tiny_config, max_workers=2).run("selection")
        assert [row.variant for row in result.rows[:4]] == ["random", "bias_one", "best", "worst"]
        assert "ordering_holds" in result.rows[2].extra

    def test_passive_baseline(self, tiny_config):
        result = StudyRunner(tiny_config, max_workers=2).run("passive_baseline")
        assert {row.variant for row in result.rows} == {"passive_classifier", "full"}
        assert all(row.ap is not None for row in result.rows)

    def test_loss_removal_reuses_cache(self, tiny_config):
        runner = StudyRunner(tiny_config, max_workers=2)
        result = runner.run("loss_removal")
        variants = [row.variant for row in result.rows[::3]]
        assert variants == [
            "remove_J_m", "remove_J_r", "remove_J_c", "remove_J_s", "remove_J_p",
            "fixed_template", "encoder_removed", "full",
        ]
        runner.run("passive_baseline")
        # "full" is reused, "passive_classifier" is a new label
        assert len(runner._cache) == 9

    def test_multiple_seeds(self, tiny_config):
        result = StudyRunner(tiny_config, seeds=[1, 2], max_workers=2).run("passive_baseline")
        assert {row.seed for row in result.rows} == {1, 2}
        summary = result.summary()
        assert len(summary) == 6

    def test_rows_are_deterministic(self, tiny_config):
        a = StudyRunner(tiny_config, max_workers=2).run("strength")
        b = StudyRunner(tiny_config, max_workers=1).run("strength")
        assert [r.to_dict() for r in a.rows] == [r.to_dict() for r in b.rows]

    @pytest.mark.slow
    def test_augmentation(self, tiny_config):
        result = StudyRunner(tiny_config, max_workers=2).run("augmentation")
        scenarios = {row.extra["scenario"] for row in result.rows}
        assert scenarios == {"none", "train_only", "test_only", "both"}

    @pytest.mark.slow
    def test_adversarial_baseline(self, tiny_config):
        result = StudyRunner(tiny_config, max_workers=2).run("adversarial_baseline")
        assert {row.variant for row in result.rows} == {"fgsm", "pgd", "full"}


class TestReporter:
    """Report files."""

    @pytest.fixture
    def result(self):
        rows = [
            StudyRow(study="strength", variant=f"m={m:g}", seed=seed, manipulator="fixed_conv", seen=True,
                     ap=0.5 + m / 4, tdr=m, psnr=40.0 - 10 * m, extra={"strength": m})
            for seed in (1, 2)
            for m in (0.1, 0.3)
        ]
        return StudyResult(study="strength", config_hash="abc123" * 8, seeds=[1, 2], rows=rows)

    def test_writes_all_formats(self, tmp_path, result):
        reporter = Reporter("strength", result.config_hash, output_dir=tmp_path)
        json_path = reporter.generate_json(result)
        csv_path = reporter.generate_csv(result)
        md_path = reporter.generate_markdown(result)

        assert reporter.output_dir == tmp_path / "strength_abc123abc123"
        data = json.loads(open(json_path).read())
        assert len(data["rows"]) == 4
        assert len(data["summary"]) == 2
        assert "environment" in data
        assert open(csv_path).read().splitlines()[0].startswith("study,variant,seed")
        assert "## Median over seeds" in open(md_path).read()

    def test_json_is_byte_stable(self, tmp_path, result):
        a = Reporter("strength", result.config_hash, output_dir=tmp_path / "a").generate_json(result)
        b = Reporter("strength", result.config_hash, output_dir=tmp_path / "b").generate_json(result)
        assert open(a, "rb").read() == open(b, "rb").read()

    def test_plot_study(self, tmp_path, result):
        paths = Reporter("strength", result.config_hash, output_dir=tmp_path).plot_study(result)
        assert all(path.endswith(".png") for path in paths)
