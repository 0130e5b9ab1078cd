"""Deterministic hash-based stand-in embeddings.

Lets the whole pipeline run air-gapped: any byte string maps to a fixed
unit-norm vector of width 768 (text) or 300 (image). The construction is
deliberately portable (SHA-256 in counter mode, big-endian u32 words,
sequential float64 norm) so other toolchains can reproduce identical
vectors from the same input.
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from riskgraph.errors import FormatError

SUPPORTED_WIDTHS = (768, 300)
_DOMAIN = b"riskgraph-embed:"


def pseudo_embed(key: bytes | str, width: int) -> np.ndarray:
    """Unit-norm vector of the given width derived from a keyed hash of key."""
    if width not in SUPPORTED_WIDTHS:
        raise FormatError(f"unsupported embedding width {width} (expected 768 or 300)")
    if isinstance(key, str):
        key = key.encode("utf-8")
    seed = hashlib.sha256(_DOMAIN + struct.pack(">I", width) + key).digest()

    values: list[float] = []
    counter = 0
    while len(values) < width:
        block = hashlib.sha256(seed + struct.pack(">I", counter)).digest()
        for i in range(0, len(block), 4):
            if len(values) == width:
                break
            (word,) = struct.unpack(">I", block[i : i + 4])
            # word/2^32 in [0,1) is exact in float64; map to [-1,1)
            values.append((word / 4294967296.0) * 2.0 - 1.0)
        counter += 1

    norm_sq = 0.0
    for v in values:
        norm_sq += v * v
    norm = norm_sq**0.5
    return np.array([v / norm for v in values], dtype=np.float64)
