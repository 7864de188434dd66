"""
Frozen toy manipulators package.
Each manipulator implements the BaseManipulator interface.
"""

from typing import Any, Dict, List

from ..core.errors import UnknownManipulatorError
from ..core.types import IMAGE_SIDE
from .base import BaseManipulator
from .fixed_conv import FixedConvManipulator
from .masked_inpaint import MaskedInpaintManipulator
from .color_warp import ColorWarpManipulator

# Registry of available manipulators
MANIPULATORS = {
    "fixed_conv": FixedConvManipulator,
    "masked_inpaint": MaskedInpaintManipulator,
    "color_warp": ColorWarpManipulator,
}


def make_manipulator(kind: str, seed: int, image_side: int = IMAGE_SIDE, **options) -> BaseManipulator:
    """
    Build a frozen manipulator.

    Args:
        kind: Manipulator name (e.g., 'fixed_conv', 'color_warp')
        seed: Seed its parameters are generated from
        image_side: Image side the manipulator accepts
        **options: Kind-specific options

    Returns:
        Manipulator instance

    Raises:
        UnknownManipulatorError: If the kind is not registered
    """
    manipulator_class = MANIPULATORS.get(kind.lower())
    if not manipulator_class:
        available = ", ".join(MANIPULATORS.keys())
        raise UnknownManipulatorError(f"Unknown manipulator: {kind}. Available: {available}")

    return manipulator_class(seed=seed, image_side=image_side, **options)


def get_manipulator(spec: Dict[str, Any], image_side: int = IMAGE_SIDE) -> BaseManipulator:
    """Build a manipulator from its config spec {"kind", "seed", "options"}."""
    return make_manipulator(
        spec["kind"],
        int(spec.get("seed", 0)),
        image_side=image_side,
        **spec.get("options", {}),
    )


def list_manipulators() -> List[str]:
    """List all available manipulator names."""
    return list(MANIPULATORS.keys())


__all__ = [
    "BaseManipulator",
    "FixedConvManipulator",
    "MaskedInpaintManipulator",
    "ColorWarpManipulator",
    "make_manipulator",
    "get_manipulator",
    "list_manipulators",
    "MANIPULATORS",
]
