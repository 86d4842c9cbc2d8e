"""Checkpoint and trajectory file I/O.

Checkpoint layout (little-endian, documented for external consumers):

    bytes 0..7    magic b"KPLABCK1"
    bytes 8..11   uint32 nx
    bytes 12..15  uint32 ny
    bytes 16..23  float64 lx
    bytes 24..31  float64 ly
    bytes 32..39  float64 t
    bytes 40..    nx*ny float64 field values, C order (x index slow),
                  nodes at x_i = -lx/2 + i*lx/nx, y_j = -ly/2 + j*ly/ny

A trajectory directory holds one checkpoint per sample plus index.json
with times, filenames and solver metadata.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np

from .solver import Trajectory
from .spectral import Field, Grid

MAGIC = b"KPLABCK1"
_HEADER = struct.Struct("<II3d")


def save_checkpoint(path: str, f: Field, t: float = 0.0) -> None:
    g = f.grid
    payload = MAGIC + _HEADER.pack(g.nx, g.ny, g.lx, g.ly, t) \
        + np.ascontiguousarray(f.values, dtype="<f8").tobytes()
    atomic_write_bytes(path, payload)


def load_checkpoint(path: str) -> tuple[Field, float]:
    with open(path, "rb") as fh:
        blob = fh.read()
    if blob[:8] != MAGIC:
        raise ValueError(f"{path}: not a kplab checkpoint")
    nx, ny, lx, ly, t = _HEADER.unpack_from(blob, 8)
    values = np.frombuffer(blob, dtype="<f8", offset=8 + _HEADER.size,
                           count=nx * ny).reshape(nx, ny)
    return Field.from_values(Grid(nx, ny, lx, ly), values.copy()), t


def atomic_write_bytes(path: str, payload: bytes) -> None:
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path: str, text: str) -> None:
    atomic_write_bytes(path, text.encode())


def _json_default(o):
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, np.integer):
        return int(o)
    if isinstance(o, np.floating):
        return float(o)
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serializable: {type(o)}")


def json_sanitize(obj):
    """Map non-finite floats to None: strict JSON has no NaN/Infinity and
    downstream consumers parse strictly."""
    if isinstance(obj, dict):
        return {k: json_sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [json_sanitize(v) for v in obj]
    if isinstance(obj, (float, np.floating)) and not np.isfinite(obj):
        return None
    return obj


def atomic_write_json(path: str, obj) -> None:
    atomic_write_text(
        path, json.dumps(json_sanitize(obj), indent=2, sort_keys=True,
                         default=_json_default) + "\n")


def save_trajectory(dirpath: str, traj: Trajectory) -> None:
    os.makedirs(dirpath, exist_ok=True)
    names = []
    for i, (t, f) in enumerate(zip(traj.times, traj.fields)):
        name = f"snap_{i:05d}.ckpt"
        save_checkpoint(os.path.join(dirpath, name), f, float(t))
        names.append(name)
    atomic_write_json(os.path.join(dirpath, "index.json"), {
        "times": [float(t) for t in traj.times],
        "files": names,
        "l2": [float(v) for v in traj.l2],
        "meta": traj.meta,
    })


def load_trajectory(dirpath: str) -> Trajectory:
    with open(os.path.join(dirpath, "index.json")) as fh:
        index = json.load(fh)
    fields = []
    grid = None
    for name in index["files"]:
        f, _ = load_checkpoint(os.path.join(dirpath, name))
        grid = f.grid
        fields.append(f)
    return Trajectory(
        grid=grid,
        times=np.asarray(index["times"], dtype=float),
        fields=fields,
        l2=np.asarray(index["l2"], dtype=float),
        meta=index.get("meta", {}),
    )
