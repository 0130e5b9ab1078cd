"""Binary model checkpoint format.

Layout (little-endian):
    magic "PKGR" | u32 version | u32 tensor count
    per tensor: u32 name length | name UTF-8 | u32 rank | u64 dims... |
                float32 row-major data
    trailer: u64 metadata length | UTF-8 JSON metadata

The metadata block carries the property layout plus the architecture
switches needed to rebuild the model (class count, attention flags, sigma,
hour scaling, and friends).
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from riskgraph.errors import FormatError
from riskgraph.attention_net import AttentionParams
from riskgraph.kg_builder import PropertyLayout
from riskgraph.post_encoder import LstmParams

MAGIC = b"PKGR"
VERSION = 1


def _write_tensor(f, name: str, array: np.ndarray) -> None:
    encoded = name.encode("utf-8")
    f.write(struct.pack("<I", len(encoded)))
    f.write(encoded)
    f.write(struct.pack("<I", array.ndim))
    for dim in array.shape:
        f.write(struct.pack("<Q", dim))
    f.write(np.ascontiguousarray(array, dtype="<f4").tobytes())


def _read_exact(f, count: int) -> bytes:
    data = f.read(count)
    if len(data) != count:
        raise FormatError("model file truncated")
    return data


def _read_tensor(f) -> tuple[str, np.ndarray]:
    (name_len,) = struct.unpack("<I", _read_exact(f, 4))
    name = _read_exact(f, name_len).decode("utf-8")
    (rank,) = struct.unpack("<I", _read_exact(f, 4))
    dims = [struct.unpack("<Q", _read_exact(f, 8))[0] for _ in range(rank)]
    count = int(np.prod(dims)) if dims else 1
    data = np.frombuffer(_read_exact(f, 4 * count), dtype="<f4").astype(np.float64)
    return name, data.reshape(dims)


def save_tensors(path: str | Path, tensors: dict[str, np.ndarray], metadata: dict) -> None:
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<I", VERSION))
        f.write(struct.pack("<I", len(tensors)))
        for name in sorted(tensors):
            _write_tensor(f, name, tensors[name])
        blob = json.dumps(metadata, sort_keys=True).encode("utf-8")
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)


def load_tensors(path: str | Path) -> tuple[dict[str, np.ndarray], dict]:
    with open(path, "rb") as f:
        magic = f.read(4)
        if magic != MAGIC:
            raise FormatError(
                f"bad model magic {magic!r} in {path} (expected {MAGIC.decode()})"
            )
        (version,) = struct.unpack("<I", _read_exact(f, 4))
        if version != VERSION:
            raise FormatError(f"unsupported model format version {version}")
        (count,) = struct.unpack("<I", _read_exact(f, 4))
        tensors = {}
        for _ in range(count):
            name, array = _read_tensor(f)
            tensors[name] = array
        (meta_len,) = struct.unpack("<Q", _read_exact(f, 8))
        metadata = json.loads(_read_exact(f, meta_len).decode("utf-8"))
    return tensors, metadata


@dataclass
class ModelBundle:
    """Everything a saved model carries: both parameter sets, layout, switches."""

    lstm: LstmParams
    attn: AttentionParams
    layout: PropertyLayout
    meta: dict

    def save(self, path: str | Path) -> None:
        tensors = {**self.lstm.tensors(), **self.attn.tensors()}
        metadata = dict(self.meta)
        metadata["layout"] = self.layout.to_json()
        save_tensors(path, tensors, metadata)

    @staticmethod
    def load(path: str | Path) -> "ModelBundle":
        tensors, metadata = load_tensors(path)
        required = [
            "lstm.w_x", "lstm.w_h", "lstm.b", "lstm.w_out", "lstm.b_out",
            "attn.w1", "attn.b1", "attn.w2", "attn.b2", "attn.w3", "attn.b3",
            "attn.w4", "attn.b4", "attn.w5", "attn.b5",
        ]
        missing = [name for name in required if name not in tensors]
        if missing:
            raise FormatError(f"model file missing tensors: {missing}")
        lstm = LstmParams(
            w_x=tensors["lstm.w_x"],
            w_h=tensors["lstm.w_h"],
            b=tensors["lstm.b"],
            w_out=tensors["lstm.w_out"],
            b_out=tensors["lstm.b_out"],
        )
        attn = AttentionParams(
            w1=tensors["attn.w1"],
            b1=tensors["attn.b1"],
            w2=tensors["attn.w2"],
            b2=tensors["attn.b2"],
            w3=tensors["attn.w3"],
            b3=tensors["attn.b3"],
            w4=tensors["attn.w4"],
            b4=tensors["attn.b4"],
            w5=tensors["attn.w5"],
            b5=tensors["attn.b5"],
        )
        lstm.validate()
        attn.validate()
        meta = dict(metadata)
        layout = PropertyLayout.from_json(meta.pop("layout"))
        if layout.total_width != attn.width:
            raise FormatError(
                f"model layout width {layout.total_width} != attention width {attn.width}"
            )
        return ModelBundle(lstm=lstm, attn=attn, layout=layout, meta=meta)
