"""Versioned binary checkpoint container.

Layout: magic, format version, a length-prefixed JSON header (model and train
configs, vocabulary hash, db bucket table, parameter name order), then each
parameter as little-endian float32 in the documented fixed order. Writing the
same trained state always produces the same bytes.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .config import ModelConfig, TrainConfig
from .net import TransformerLM

MAGIC = b"CTSK"
FORMAT_VERSION = 1


class CheckpointError(ValueError):
    """Unreadable or incompatible checkpoint container."""


class CheckpointMismatch(CheckpointError):
    """Checkpoint header disagrees with the provided vocabulary."""


def save_checkpoint(path, model: TransformerLM, vocab_hash: str,
                    train_cfg: TrainConfig | None = None, bucket_table=None,
                    extra: dict | None = None) -> None:
    names = model.param_names()
    header = {
        "format_version": FORMAT_VERSION,
        "model": model.cfg.to_obj(),
        "train": train_cfg.to_obj() if train_cfg is not None else None,
        "vocab_sha256": vocab_hash,
        "db_buckets": list(bucket_table.to_obj()) if bucket_table is not None else None,
        "params": names,
    }
    if extra:
        header["extra"] = extra
    blob = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", FORMAT_VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        for name in names:
            arr = np.ascontiguousarray(model.params[name], dtype="<f4")
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.tobytes())


def read_header(path) -> dict:
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != FORMAT_VERSION:
            raise CheckpointError(f"{path}: unsupported format version {version}")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        return json.loads(fh.read(hlen).decode("utf-8"))


def load_checkpoint(path, dtype=np.float32, expected_vocab_hash: str | None = None):
    """Rebuild the model from a checkpoint; returns (model, header)."""
    with open(path, "rb") as fh:
        if fh.read(4) != MAGIC:
            raise CheckpointError(f"{path}: not a checkpoint file")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != FORMAT_VERSION:
            raise CheckpointError(f"{path}: unsupported format version {version}")
        (hlen,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(hlen).decode("utf-8"))
        if expected_vocab_hash is not None and header["vocab_sha256"] != expected_vocab_hash:
            raise CheckpointMismatch(
                f"{path}: checkpoint was trained with a different vocabulary"
            )
        cfg = ModelConfig.from_obj(header["model"])
        model = TransformerLM(cfg, seed=0, dtype=dtype)
        if header["params"] != model.param_names():
            raise CheckpointError(f"{path}: parameter order does not match this build")
        for name in header["params"]:
            (ndim,) = struct.unpack("<I", fh.read(4))
            shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
            want = model.params[name].shape
            if tuple(shape) != want:
                raise CheckpointError(f"{path}: {name} has shape {shape}, expected {want}")
            count = int(np.prod(shape)) if shape else 1
            data = np.frombuffer(fh.read(4 * count), dtype="<f4").reshape(shape)
            model.params[name] = data.astype(dtype)
    return model, header
