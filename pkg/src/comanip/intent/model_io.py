"""Model file round trip.

Versioned little-endian binary container (see docs/model_format.md for the
byte layout) plus a JSON debug export of every weight. Loading a saved model
reproduces forward outputs bit-exactly: weights are stored as raw float64.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..dynamics import ValidationError
from .data import N_CHANNELS
from .network import MODEL_VERSION, RecurrentModel

MAGIC = b"CMNP"
_HEADER = struct.Struct("<4sIIIIIq")  # magic, version, layers, hidden, window, channels, seed


def save_model(model: RecurrentModel, path: str | Path) -> None:
    model.check_shapes()
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, model.version, model.layers, model.hidden,
                              model.window, N_CHANNELS, model.seed))
        fh.write(np.ascontiguousarray(model.mean, dtype="<f8").tobytes())
        fh.write(np.ascontiguousarray(model.std, dtype="<f8").tobytes())
        for key in model.param_order():
            arr = model.params[key]
            fh.write(struct.pack("<I", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path: str | Path) -> RecurrentModel:
    with open(path, "rb") as fh:
        raw = fh.read(_HEADER.size)
        if len(raw) < _HEADER.size:
            raise ValidationError(f"{path}: truncated model header")
        magic, version, layers, hidden, window, channels, seed = _HEADER.unpack(raw)
        if magic != MAGIC:
            raise ValidationError(f"{path}: not a model file (magic {magic!r})")
        if version != MODEL_VERSION:
            raise ValidationError(f"{path}: unsupported model version {version}")
        if channels != N_CHANNELS:
            raise ValidationError(f"{path}: expected {N_CHANNELS} channels")
        mean = np.frombuffer(fh.read(8 * N_CHANNELS), dtype="<f8").copy()
        std = np.frombuffer(fh.read(8 * N_CHANNELS), dtype="<f8").copy()
        model = RecurrentModel(layers=layers, hidden=hidden, params={},
                               mean=mean, std=std, seed=seed,
                               version=version, window=window)
        for key in model.param_order():
            (ndim,) = struct.unpack("<I", fh.read(4))
            shape = struct.unpack(f"<{ndim}I", fh.read(4 * ndim))
            count = int(np.prod(shape))
            arr = np.frombuffer(fh.read(8 * count), dtype="<f8").reshape(shape).copy()
            model.params[key] = arr
        if fh.read(1):
            raise ValidationError(f"{path}: trailing bytes after weights")
    model.check_shapes()
    return model


def export_debug_json(model: RecurrentModel, path: str | Path) -> None:
    """Human-inspectable dump of the whole model (weights as nested lists)."""
    doc = {
        "version": model.version,
        "layers": model.layers,
        "hidden": model.hidden,
        "window": model.window,
        "seed": model.seed,
        "mean": model.mean.tolist(),
        "std": model.std.tolist(),
        "params": {k: v.tolist() for k, v in model.params.items()},
    }
    with open(path, "w") as fh:
        json.dump(doc, fh)
        fh.write("\n")
