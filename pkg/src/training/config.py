"""
Experiment configuration for template training.
"""

import hashlib
import json
import logging
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from ..augment import AugmentationPipeline
from ..core.errors import ConfigurationError
from ..core.types import IMAGE_SIDE, EncryptConfig, FrequencyFilter, LossWeights
from ..manipulators import MANIPULATORS

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("seed", "manipulator")
OPTIMIZERS = ("adam",)


@dataclass(frozen=True)
class CorpusConfig:
    """Train/test corpus sizes and optional image folders."""
    train_size: int = 500
    test_size: int = 200
    seed: Optional[int] = None
    train_folder: Optional[str] = None
    test_folder: Optional[str] = None

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class TrainConfig:
    """
    All knobs of one training run.

    Defaults reproduce the reference setup: n = 3 templates at strength
    0.30, Adam at learning rate 1e-5, batch size 4, 10 epochs.

    Example:
        cfg = TrainConfig.from_json("configs/minimal.json")
        print(cfg.config_hash())
    """
    seed: int
    manipulator: Dict[str, Any]
    n: int = 3
    strength: float = 0.30
    weights: LossWeights = field(default_factory=LossWeights)
    k: int = 50
    learning_rate: float = 1e-5
    batch_size: int = 4
    epochs: int = 10
    optimizer: str = "adam"
    augmentation: List[Dict[str, Any]] = field(default_factory=list)
    image_side: int = IMAGE_SIDE
    corpus: CorpusConfig = field(default_factory=CorpusConfig)
    eval_manipulators: List[Dict[str, Any]] = field(default_factory=list)
    far: float = 0.005
    variant: str = "full"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        """Raise ConfigurationError naming the first invalid field."""
        if not isinstance(self.seed, int) or self.seed < 0:
            raise ConfigurationError(f"Invalid field 'seed': must be a non-negative integer, got {self.seed!r}")
        for name in ("n", "batch_size", "epochs", "image_side", "k"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigurationError(f"Invalid field '{name}': must be a positive integer, got {value!r}")
        if not 0.0 <= self.strength <= 1.0:
            raise ConfigurationError(f"Invalid field 'strength': must be in [0, 1], got {self.strength}")
        if self.learning_rate < 0:
            raise ConfigurationError(f"Invalid field 'learning_rate': must be >= 0, got {self.learning_rate}")
        if self.k > self.image_side:
            raise ConfigurationError(f"Invalid field 'k': {self.k} exceeds image_side {self.image_side}")
        if self.optimizer not in OPTIMIZERS:
            raise ConfigurationError(f"Invalid field 'optimizer': {self.optimizer}. Available: {', '.join(OPTIMIZERS)}")
        if not 0.0 < self.far < 1.0:
            raise ConfigurationError(f"Invalid field 'far': must be in (0, 1), got {self.far}")
        for spec in [self.manipulator, *self.eval_manipulators]:
            _check_manipulator_spec(spec)
        AugmentationPipeline.from_recipe(self.augmentation)

    @property
    def encrypt_config(self) -> EncryptConfig:
        return EncryptConfig(strength=self.strength)

    @property
    def frequency_filter(self) -> FrequencyFilter:
        return FrequencyFilter(k=self.k)

    @property
    def corpus_seed(self) -> int:
        return self.seed if self.corpus.seed is None else self.corpus.seed

    def unseen_manipulators(self) -> List[Dict[str, Any]]:
        """Evaluation manipulators; defaults to every other registered kind."""
        if self.eval_manipulators:
            return [dict(spec) for spec in self.eval_manipulators]
        seed = int(self.manipulator.get("seed", 0))
        return [
            {"kind": kind, "seed": seed}
            for kind in MANIPULATORS
            if kind != self.manipulator["kind"]
        ]

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for serialization."""
        return {
            "seed": self.seed,
            "manipulator": self.manipulator,
            "n": self.n,
            "strength": self.strength,
            "weights": self.weights.to_dict(),
            "k": self.k,
            "learning_rate": self.learning_rate,
            "batch_size": self.batch_size,
            "epochs": self.epochs,
            "optimizer": self.optimizer,
            "augmentation": self.augmentation,
            "image_side": self.image_side,
            "corpus": self.corpus.to_dict(),
            "eval_manipulators": self.eval_manipulators,
            "far": self.far,
            "variant": self.variant,
        }

    def config_hash(self) -> str:
        """SHA-256 of the canonical (sorted-key) JSON form."""
        canonical = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    def short_hash(self) -> str:
        return self.config_hash()[:12]

    def with_overrides(self, **changes) -> "TrainConfig":
        """Copy with fields replaced; re-validated."""
        return replace(self, **changes)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "TrainConfig":
        """
        Build from a parsed JSON document.

        Raises:
            ConfigurationError: On a missing required field, an unknown
                field or an invalid value
        """
        missing = [name for name in REQUIRED_FIELDS if name not in data]
        if missing:
            raise ConfigurationError(f"Missing required config field: {', '.join(missing)}")

        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigurationError(f"Unknown config field: {', '.join(unknown)}")

        values = dict(data)
        try:
            if "weights" in values:
                values["weights"] = LossWeights.from_dict(values["weights"])
            if "corpus" in values:
                values["corpus"] = CorpusConfig(**values["corpus"])
        except (TypeError, ValueError) as e:
            raise ConfigurationError(f"Invalid config: {e}") from e

        return cls(**values)

    @classmethod
    def from_json(cls, path: Union[str, Path]) -> "TrainConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigurationError(f"Config file not found: {path}")
        try:
            with open(path, "r", encoding="utf-8") as f:
                data = json.load(f)
        except json.JSONDecodeError as e:
            raise ConfigurationError(f"Config file {path} is not valid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigurationError(f"Config file {path} must contain a JSON object")
        return cls.from_dict(data)

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.to_dict(), f, indent=2, sort_keys=True)
        return path


def _check_manipulator_spec(spec: Any) -> None:
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ConfigurationError(f"Invalid field 'manipulator': expected {{\"kind\", \"seed\"}}, got {spec!r}")
    if spec["kind"] not in MANIPULATORS:
        available = ", ".join(MANIPULATORS.keys())
        raise ConfigurationError(f"Invalid field 'manipulator': unknown kind {spec['kind']}. Available: {available}")
