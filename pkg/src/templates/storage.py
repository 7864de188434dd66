"""
Template-set file format.

Layout (all little-endian):
    magic    4 bytes  b"PIMD"
    version  uint16
    n, H, W  uint32 x 3
    payload  n*H*W float32, row-major, template-major
    seed     uint64

A JSON sidecar with the same basename and a ``.json`` suffix records the
training config and loss weights.
"""

import json
import logging
import struct
from pathlib import Path
from typing import Any, Dict, Optional, Tuple, Union

import numpy as np
import torch

from ..core.errors import TemplateFormatError
from .template_set import FORMAT_VERSION, TemplateSet

logger = logging.getLogger(__name__)

MAGIC = b"PIMD"
_HEADER = struct.Struct("<4sHIII")
_FOOTER = struct.Struct("<Q")


def encode_template_set(template_set: TemplateSet) -> bytes:
    """Serialize a template set to bytes."""
    n, height, width = template_set.planes.shape
    header = _HEADER.pack(MAGIC, template_set.version, n, height, width)
    payload = template_set.planes.to(torch.float32).numpy().astype("<f4").tobytes(order="C")
    return header + payload + _FOOTER.pack(template_set.seed & 0xFFFFFFFFFFFFFFFF)


def decode_template_set(data: bytes) -> TemplateSet:
    """Parse bytes produced by encode_template_set."""
    if len(data) < _HEADER.size + _FOOTER.size:
        raise TemplateFormatError(f"Template file too short: {len(data)} bytes")

    magic, version, n, height, width = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise TemplateFormatError(f"Bad magic {magic!r}, expected {MAGIC!r}")
    if version != FORMAT_VERSION:
        raise TemplateFormatError(f"Unsupported template format version {version}")

    expected = _HEADER.size + n * height * width * 4 + _FOOTER.size
    if len(data) != expected:
        raise TemplateFormatError(f"Template file has {len(data)} bytes, expected {expected}")

    payload = np.frombuffer(data, dtype="<f4", count=n * height * width, offset=_HEADER.size)
    (seed,) = _FOOTER.unpack_from(data, expected - _FOOTER.size)
    planes = torch.from_numpy(payload.astype(np.float32).reshape(n, height, width))
    try:
        return TemplateSet(planes=planes, seed=int(seed), version=version)
    except ValueError as e:
        raise TemplateFormatError(str(e)) from e


def sidecar_path(path: Union[str, Path]) -> Path:
    return Path(path).with_suffix(".json")


def save_template_set(
    template_set: TemplateSet,
    path: Union[str, Path],
    sidecar: Optional[Dict[str, Any]] = None,
) -> Path:
    """
    Write a template set and, optionally, its JSON sidecar.

    Args:
        template_set: Set to write
        path: Output file path
        sidecar: Training config, loss weights and other provenance

    Returns:
        Path of the written template file
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_template_set(template_set))

    if sidecar is not None:
        with open(sidecar_path(path), "w", encoding="utf-8") as f:
            json.dump(sidecar, f, ensure_ascii=False, indent=2, sort_keys=True)

    logger.info(f"Template set written: {path} (n={template_set.n})")
    return path


def load_template_set(path: Union[str, Path]) -> Tuple[TemplateSet, Optional[Dict[str, Any]]]:
    """
    Read a template set and its sidecar if present.

    Returns:
        Tuple of (TemplateSet, sidecar dict or None)
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Template file not found: {path}")

    template_set = decode_template_set(path.read_bytes())

    sidecar = None
    if sidecar_path(path).exists():
        with open(sidecar_path(path), "r", encoding="utf-8") as f:
            sidecar = json.load(f)

    return template_set, sidecar
