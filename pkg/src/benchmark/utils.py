"""
Utility functions for benchmark module.
Separated to avoid circular imports.
"""

import math
import platform
import re
from typing import Any, Dict


def get_machine_info() -> Dict[str, str]:
    """
    Get machine information for report context.

    Returns:
        Dictionary with platform, Python and library versions
    """
    import numpy
    import torch

    return {
        "platform": f"{platform.system()} {platform.release()}",
        "machine": platform.machine(),
        "python": platform.python_version(),
        "torch": torch.__version__,
        "numpy": numpy.__version__,
        "torch_threads": str(torch.get_num_threads()),
    }


def get_report_subdir_name(label: str, config_hash: str) -> str:
    """
    Generate report subdirectory name from a label and config hash.

    Format: label_hash12
    Example: set_size_3fa1c09b2e4d

    Returns:
        Subdirectory name string
    """
    safe_label = re.sub(r"[^A-Za-z0-9_.-]+", "-", label).strip("-") or "run"
    return f"{safe_label}_{config_hash[:12]}"


def format_metric(value: Any, digits: int = 4) -> str:
    """Format an AP/TDR/PSNR value for tables; None and inf render as text."""
    if value is None:
        return "n/a"
    if isinstance(value, float):
        if math.isinf(value):
            return "inf"
        if math.isnan(value):
            return "n/a"
        return f"{value:.{digits}f}"
    return str(value)
