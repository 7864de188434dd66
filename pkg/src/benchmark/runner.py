"""
Study runner for the seeded ablation grids.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence

import pandas as pd

from ..augment import RECIPES, AugmentationPipeline, get_recipe
from ..config import Config
from ..core.errors import ConfigurationError
from ..core.types import LOSS_NAMES
from ..data.loader import ImageCorpus
from ..data.synthetic import load_or_generate
from ..detection import (
    DetectionReport,
    evaluate_classifier,
    evaluate_detector,
    export_encrypt_config,
    selection_best_worst_oracle,
    selection_bias_one,
)
from ..manipulators import get_manipulator
from ..templates import pairwise_cosine_stats
from ..training import (
    TrainConfig,
    TrainResult,
    remove_loss_variant,
    train,
    train_adversarial_baseline,
    train_fixed_template,
    train_passive_classifier,
)

logger = logging.getLogger(__name__)

SET_SIZES = (1, 3, 10)
STRENGTHS = (0.1, 0.3, 0.5, 1.0)
AUGMENT_SCENARIOS = ("train_only", "test_only", "both")
ADVERSARIAL_ATTACKS = (
    {"attack": "fgsm", "epsilon": 0.03, "steps": 1},
    {"attack": "pgd", "epsilon": 0.03, "steps": 10},
)

STUDIES: Dict[str, str] = {
    "set_size": "Template set size n in {1, 3, 10}",
    "strength": "Template strength m in {0.1, 0.3, 0.5, 1.0}, with PSNR",
    "loss_removal": "Drop each loss in turn, fix the templates, or remove the encoder",
    "selection": "Random, bias-one, best and worst template selection",
    "augmentation": "Robustness recipes applied at train time, test time or both",
    "adversarial_baseline": "Adversarial-noise templates (fgsm, pgd) vs the full method",
    "passive_baseline": "Passive classifier vs the full method",
}


def get_study(name: str) -> str:
    """
    Validate a study name.

    Raises:
        ConfigurationError: If the study is not registered
    """
    if name not in STUDIES:
        available = ", ".join(STUDIES.keys())
        raise ConfigurationError(f"Unknown study: {name}. Available: {available}")
    return name


@dataclass
class StudyRow:
    """One (variant, seed, evaluation manipulator) measurement."""
    study: str
    variant: str
    seed: int
    manipulator: str
    seen: bool
    ap: Optional[float] = None
    tdr: Optional[float] = None
    psnr: Optional[float] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "study": self.study,
            "variant": self.variant,
            "seed": self.seed,
            "manipulator": self.manipulator,
            "seen": self.seen,
            "ap": self.ap,
            "tdr": self.tdr,
            "psnr": self.psnr,
            **self.extra,
        }


@dataclass
class StudyResult:
    """All rows of one study run."""
    study: str
    config_hash: str
    seeds: List[int]
    rows: List[StudyRow] = field(default_factory=list)
    reports: Dict[str, DetectionReport] = field(default_factory=dict)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([row.to_dict() for row in self.rows])

    def summary(self) -> pd.DataFrame:
        """Median AP/TDR/PSNR over seeds per (variant, manipulator)."""
        frame = self.to_frame()
        if frame.empty:
            return frame
        return (
            frame.groupby(["variant", "manipulator", "seen"], sort=False)[["ap", "tdr", "psnr"]]
            .median()
            .reset_index()
        )

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            "study": self.study,
            "description": STUDIES[self.study],
            "config_hash": self.config_hash,
            "seeds": self.seeds,
            "rows": [row.to_dict() for row in self.rows],
            "summary": _records(self.summary()),
        }


def _records(frame: pd.DataFrame) -> List[Dict[str, Any]]:
    return [
        {key: (None if pd.isna(value) else value) for key, value in record.items()}
        for record in frame.to_dict(orient="records")
    ]


class StudyRunner:
    """
    Runs one seeded study grid: trains each variant, then evaluates it on
    the seen manipulator and every unseen one.

    Features:
        - Per-seed corpora (synthetic or folder-backed)
        - Trained variants cached by config hash within a run
        - Progress and row callbacks

    Example:
        runner = StudyRunner(TrainConfig.from_json("configs/minimal.json"))
        runner.on_progress(lambda done, total, label: print(done, total, label))
        result = runner.run("set_size")
    """

    def __init__(
        self,
        config: TrainConfig,
        seeds: Optional[Sequence[int]] = None,
        max_workers: Optional[int] = None,
    ):
        """
        Initialize study runner.

        Args:
            config: Base training configuration
            seeds: Seeds to repeat the grid over (default: the config seed)
            max_workers: Scoring thread pool size (default: Config.NUM_WORKERS)
        """
        self.config = config
        self.seeds = list(seeds) if seeds else [config.seed]
        self.max_workers = max_workers or Config.NUM_WORKERS

        self._cache: Dict[str, TrainResult] = {}
        self._corpora: Dict[tuple, ImageCorpus] = {}
        self._completed = 0
        self._total = 0

        # Callbacks
        self._on_progress: Optional[Callable[[int, int, str], None]] = None
        self._on_result: Optional[Callable[[StudyRow], None]] = None

    def on_progress(self, callback: Callable[[int, int, str], None]) -> "StudyRunner":
        """
        Set progress callback.

        Args:
            callback: Function(completed, total, label) called per trained variant
        """
        self._on_progress = callback
        return self

    def on_result(self, callback: Callable[[StudyRow], None]) -> "StudyRunner":
        """Set row callback, called with each StudyRow."""
        self._on_result = callback
        return self

    def run(self, study: str) -> StudyResult:
        """
        Run a study over every seed.

        Returns:
            StudyResult with one row per (variant, seed, manipulator)

        Raises:
            ConfigurationError: If the study is unknown
        """
        get_study(study)
        handler = getattr(self, f"_study_{study}")
        result = StudyResult(study=study, config_hash=self.config.config_hash(), seeds=self.seeds)

        self._completed = 0
        self._total = self._variant_count(study) * len(self.seeds)
        logger.info(f"Starting study {study}: {self._total} variants over seeds {self.seeds}")

        for seed in self.seeds:
            cfg = self.config.with_overrides(seed=seed)
            for row in handler(cfg, result):
                result.rows.append(row)
                if self._on_result:
                    self._on_result(row)

        logger.info(f"Study {study} complete: {len(result.rows)} rows")
        return result

    def _variant_count(self, study: str) -> int:
        counts = {
            "set_size": len(SET_SIZES),
            "strength": len(STRENGTHS),
            "loss_removal": len(LOSS_NAMES) + 3,
            "selection": 1,
            "augmentation": 1 + len(RECIPES),
            "adversarial_baseline": len(ADVERSARIAL_ATTACKS) + 1,
            "passive_baseline": 2,
        }
        return counts[study]

    # ------------------------------------------------------------------
    # Corpora and training
    # ------------------------------------------------------------------

    def _corpus(self, cfg: TrainConfig, split: str) -> ImageCorpus:
        size = cfg.corpus.train_size if split == "train" else cfg.corpus.test_size
        folder = cfg.corpus.train_folder if split == "train" else cfg.corpus.test_folder
        key = (cfg.corpus_seed, split, size, folder, cfg.image_side)
        if key not in self._corpora:
            self._corpora[key] = load_or_generate(cfg.corpus_seed, split, size, folder=folder, side=cfg.image_side)
        return self._corpora[key]

    def _train(self, label: str, cfg: TrainConfig, fn: Callable[..., TrainResult], **kwargs) -> TrainResult:
        key = f"{label}:{cfg.config_hash()}:{sorted(kwargs.items())}"
        if key not in self._cache:
            self._cache[key] = fn(cfg, self._corpus(cfg, "train"), **kwargs)
        self._completed += 1
        if self._on_progress:
            self._on_progress(self._completed, self._total, label)
        return self._cache[key]

    # ------------------------------------------------------------------
    # Evaluation
    # ------------------------------------------------------------------

    def _evaluate(
        self,
        study: str,
        variant: str,
        trained: TrainResult,
        result: StudyResult,
        extra: Optional[Dict[str, Any]] = None,
        augmentation: Optional[AugmentationPipeline] = None,
    ) -> List[StudyRow]:
        cfg = trained.config
        test = self._corpus(cfg, "test")
        specs = [(cfg.manipulator, True)] + [(spec, False) for spec in cfg.unseen_manipulators()]

        rows = []
        for spec, seen in specs:
            manipulator = get_manipulator(spec, image_side=cfg.image_side)
            if trained.classifier is not None:
                report = evaluate_classifier(
                    trained.classifier, trained.templates, manipulator, test,
                    strength=cfg.strength, seed=cfg.seed, far=cfg.far, config_hash=cfg.config_hash(),
                )
            else:
                report = evaluate_detector(
                    trained.encoder, trained.templates, manipulator, test,
                    strength=cfg.strength, seed=cfg.seed, far=cfg.far, augmentation=augmentation,
                    config_hash=cfg.config_hash(), max_workers=self.max_workers,
                )
            result.reports[f"{variant}_seed{cfg.seed}_{manipulator.name}"] = report
            rows.append(StudyRow(
                study=study,
                variant=variant,
                seed=cfg.seed,
                manipulator=manipulator.name,
                seen=seen,
                ap=report.ap,
                tdr=report.tdr,
                psnr=report.psnr_mean,
                extra=dict(extra or {}),
            ))
        return rows

    # ------------------------------------------------------------------
    # Studies
    # ------------------------------------------------------------------

    def _study_set_size(self, cfg: TrainConfig, result: StudyResult) -> List[StudyRow]:
        rows = []
        for n in SET_SIZES:
            trained = self._train(f"n={n}", cfg.with_overrides(n=n), train)
            stats = pairwise_cosine_stats(trained.templates)
            rows += self._evaluate("set_size", f"n={n}", trained, result, {"n": n, "pairwise_mean": stats.mean})
        return rows

    def _study_strength(self, cfg: TrainConfig, result: StudyResult) -> List[StudyRow]:
        rows = []
        for strength in STRENGTHS:
            trained = self._train(f"m={strength:g}", cfg.with_overrides(strength=strength), train)
            rows += self._evaluate("strength", f"m={strength:g}", trained, result, {"strength": strength})
        return rows

    def _study_loss_removal(self, cfg: TrainConfig, result: StudyResult) -> List[StudyRow]:
        rows = []
        for loss in LOSS_NAMES:
            trained = self._train(f"remove_{loss}", cfg, remove_loss_variant, dropped=loss)
            rows += self._evaluate("loss_removal", f"remove_{loss}", trained, result)
        trained = self._train("fixed_template", cfg, train_fixed_template)
        rows += self._evaluate("loss_removal", "fixed_template", trained, result)
        trained = self._train("encoder_removed", cfg, train_passive_classifier)
        rows += self._evaluate("loss_removal", "encoder_removed", trained, result)
        trained = self._train("full", cfg, train)
        rows += self._evaluate("loss_removal", "full", trained, result)
        return rows

    def _study_selection(self, cfg: TrainConfig, result: StudyResult) -> List[StudyRow]:
        trained = self._train("full", cfg, train)
        test = self._corpus(cfg, "test")
        encrypt_cfg = export_encrypt_config(cfg.strength)
        specs = [(cfg.manipulator, True)] + [(spec, False) for spec in cfg.unseen_manipulators()]

        rows = []
        for spec, seen in specs:
            manipulator = get_manipulator(spec, image_side=cfg.image_side)
            oracle = selection_best_worst_oracle(
                trained.encoder, trained.templates, manipulator, test, encrypt_cfg, seed=cfg.seed,
            )
            bias = selection_bias_one(trained.encoder, trained.templates, manipulator, test, encrypt_cfg)

            base = dict(study="selection", seed=cfg.seed, manipulator=manipulator.name, seen=seen)
            rows.append(StudyRow(variant="random", ap=oracle.ap_random, **base))
            rows.append(StudyRow(
                variant="bias_one",
                ap=bias.mean,
                extra={"spread": bias.spread, "min": bias.min, "max": bias.max},
                **base,
            ))
            rows.append(StudyRow(variant="best", ap=oracle.ap_best, extra={"ordering_holds": oracle.ordering_holds}, **base))
            rows.append(StudyRow(variant="worst", ap=oracle.ap_worst, **base))
        return rows

    def _study_augmentation(self, cfg: TrainConfig, result: StudyResult) -> List[StudyRow]:
        plain = self._train("no_augmentation", cfg.with_overrides(augmentation=[]), train)
        rows = self._evaluate("augmentation", "none", plain, result, {"recipe": "none", "scenario": "none"})

        for recipe in RECIPES:
            entries = get_recipe(recipe)
            pipeline = AugmentationPipeline.from_recipe(entries)
            augmented = self._train(f"augment_{recipe}", cfg.with_overrides(augmentation=entries), train)
            for scenario in AUGMENT_SCENARIOS:
                trained = plain if scenario == "test_only" else augmented
                test_pipeline = None if scenario == "train_only" else pipeline
                rows += self._evaluate(
                    "augmentation",
                    f"{recipe}/{scenario}",
                    trained,
                    result,
                    {"recipe": recipe, "scenario": scenario},
                    augmentation=test_pipeline,
                )
        return rows

    def _study_adversarial_baseline(self, cfg: TrainConfig, result: StudyResult) -> List[StudyRow]:
        rows = []
        for attack in ADVERSARIAL_ATTACKS:
            trained = self._train(attack["attack"], cfg, train_adversarial_baseline, **attack)
            rows += self._evaluate("adversarial_baseline", attack["attack"], trained, result, dict(attack))
        trained = self._train("full", cfg, train)
        rows += self._evaluate("adversarial_baseline", "full", trained, result)
        return rows

    def _study_passive_baseline(self, cfg: TrainConfig, result: StudyResult) -> List[StudyRow]:
        passive = self._train("passive_classifier", cfg, train_passive_classifier)
        rows = self._evaluate("passive_baseline", "passive_classifier", passive, result)
        trained = self._train("full", cfg, train)
        rows += self._evaluate("passive_baseline", "full", trained, result)
        return rows
