"""
Deterministic random streams.

Every draw is produced by a fresh PCG64 generator keyed on ``(seed, counter)``
through numpy's ``SeedSequence``, after which the counter advances by one.
The full state is therefore two integers: it serializes trivially and replays
identically across runs and platforms.
"""

from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import torch


Shape = Union[int, Tuple[int, ...]]


@dataclass
class RngStream:
    """
    Seeded random stream with an explicit draw position.

    Example:
        rng = make_rng(7)
        flags = rng.random()
        plane = rng.uniform((128, 128))
    """
    seed: int
    counter: int = 0

    def _next(self) -> np.random.Generator:
        generator = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence([self.seed, self.counter]))
        )
        self.counter += 1
        return generator

    def random(self) -> float:
        """Draw one float in [0, 1)."""
        return float(self._next().random())

    def uniform(self, shape: Shape, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """Draw i.i.d. U[low, high) values as float64."""
        return self._next().uniform(low, high, size=shape)

    def normal(self, shape: Shape, mean: float = 0.0, std: float = 1.0) -> np.ndarray:
        """Draw i.i.d. Gaussian values as float64."""
        return self._next().normal(mean, std, size=shape)

    def integers(self, low: int, high: int, size: Optional[Shape] = None) -> Union[int, np.ndarray]:
        """Draw integers from [low, high) (numpy convention)."""
        value = self._next().integers(low, high, size=size)
        return int(value) if size is None else value

    def permutation(self, n: int) -> np.ndarray:
        """Random permutation of range(n)."""
        return self._next().permutation(n)

    def spawn(self, *tags: int) -> "RngStream":
        """
        Derive an independent child stream.

        The child seed depends on the parent seed and the given tags only,
        not on the parent's counter, so per-image streams can be created in
        any order.
        """
        entropy = np.random.SeedSequence([self.seed, *tags]).generate_state(2, dtype=np.uint32)
        child_seed = (int(entropy[0]) << 32) | int(entropy[1])
        return RngStream(seed=child_seed)

    def torch_generator(self) -> torch.Generator:
        """Seed a CPU torch generator from the next draw."""
        generator = torch.Generator()
        generator.manual_seed(self.integers(0, 2**62))
        return generator

    def to_dict(self) -> Dict[str, int]:
        """Convert to dictionary for serialization."""
        return {"seed": self.seed, "counter": self.counter}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RngStream":
        return cls(seed=int(data["seed"]), counter=int(data.get("counter", 0)))


def make_rng(seed: int) -> RngStream:
    """
    Create a deterministic stream.

    Args:
        seed: Non-negative integer seed

    Returns:
        RngStream positioned at its first draw
    """
    if seed < 0:
        raise ValueError(f"Seed must be non-negative, got {seed}")
    return RngStream(seed=int(seed))
