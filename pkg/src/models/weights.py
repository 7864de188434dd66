"""
Network weights file format.

Layout (all little-endian):
    magic    4 bytes  b"PIMW"
    version  uint16
    count    uint32
    manifest count entries of
                 name_len uint16, name utf-8,
                 ndim uint8, dims uint32 x ndim
    payload  float32 values of every entry in manifest order, row-major

Only floating-point state (weights, biases, batch-norm statistics) is stored;
integer bookkeeping buffers are rebuilt on load.
"""

import logging
import struct
from collections import OrderedDict
from pathlib import Path
from typing import Dict, Union

import numpy as np
import torch
import torch.nn as nn

from ..core.errors import TemplateFormatError

logger = logging.getLogger(__name__)

MAGIC = b"PIMW"
WEIGHTS_VERSION = 1

_HEADER = struct.Struct("<4sHI")


def _floating_state(module: nn.Module) -> "OrderedDict[str, torch.Tensor]":
    return OrderedDict(
        (name, tensor) for name, tensor in module.state_dict().items()
        if tensor.is_floating_point()
    )


def encode_weights(module: nn.Module) -> bytes:
    """Serialize the floating-point state of a module."""
    state = _floating_state(module)
    parts = [_HEADER.pack(MAGIC, WEIGHTS_VERSION, len(state))]

    for name, tensor in state.items():
        encoded = name.encode("utf-8")
        parts.append(struct.pack("<H", len(encoded)))
        parts.append(encoded)
        parts.append(struct.pack("<B", tensor.dim()))
        parts.append(struct.pack(f"<{tensor.dim()}I", *tensor.shape))

    for tensor in state.values():
        parts.append(tensor.detach().to(torch.float32).cpu().numpy().astype("<f4").tobytes(order="C"))

    return b"".join(parts)


def decode_weights(data: bytes) -> "OrderedDict[str, torch.Tensor]":
    """Parse bytes produced by encode_weights into a state dict."""
    if len(data) < _HEADER.size:
        raise TemplateFormatError(f"Weights file too short: {len(data)} bytes")
    magic, version, count = _HEADER.unpack_from(data, 0)
    if magic != MAGIC:
        raise TemplateFormatError(f"Bad magic {magic!r}, expected {MAGIC!r}")
    if version != WEIGHTS_VERSION:
        raise TemplateFormatError(f"Unsupported weights format version {version}")

    offset = _HEADER.size
    manifest = []
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", data, offset)
            offset += 2
            name = data[offset:offset + name_len].decode("utf-8")
            offset += name_len
            (ndim,) = struct.unpack_from("<B", data, offset)
            offset += 1
            shape = struct.unpack_from(f"<{ndim}I", data, offset)
            offset += 4 * ndim
            manifest.append((name, shape))
    except (struct.error, UnicodeDecodeError) as e:
        raise TemplateFormatError(f"Corrupt weights manifest: {e}") from e

    total = sum(int(np.prod(shape)) for _, shape in manifest)
    if len(data) != offset + 4 * total:
        raise TemplateFormatError(
            f"Weights file has {len(data)} bytes, expected {offset + 4 * total}"
        )

    payload = np.frombuffer(data, dtype="<f4", count=total, offset=offset).astype(np.float32)
    state = OrderedDict()
    position = 0
    for name, shape in manifest:
        size = int(np.prod(shape))
        state[name] = torch.from_numpy(payload[position:position + size].copy()).reshape(shape)
        position += size
    return state


def save_weights(module: nn.Module, path: Union[str, Path]) -> Path:
    """Write module weights to ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(encode_weights(module))
    logger.info(f"Weights written: {path}")
    return path


def load_weights(module: nn.Module, path: Union[str, Path]) -> nn.Module:
    """
    Load weights from ``path`` into a module of matching architecture.

    Raises:
        TemplateFormatError: If the file is malformed or does not match
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"Weights file not found: {path}")

    state = decode_weights(path.read_bytes())
    expected: Dict[str, torch.Tensor] = _floating_state(module)

    missing = [name for name in expected if name not in state]
    unexpected = [name for name in state if name not in expected]
    if missing or unexpected:
        raise TemplateFormatError(
            f"Weights do not match architecture (missing: {missing[:3]}, unexpected: {unexpected[:3]})"
        )
    for name, tensor in state.items():
        if tuple(tensor.shape) != tuple(expected[name].shape):
            raise TemplateFormatError(
                f"Shape mismatch for {name}: file {tuple(tensor.shape)}, model {tuple(expected[name].shape)}"
            )

    module.load_state_dict(state, strict=False)
    return module
