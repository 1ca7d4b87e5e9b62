"""Binary tensor files: a JSON header followed by a raw complex payload.

Layout::

    b"WFTENSOR"             8-byte magic
    uint64 little-endian    header length in bytes
    header                  UTF-8 JSON
    payload                 row-major complex128, little-endian, (re, im) interleaved

The header carries ``shape``, ``axes`` (names in payload order), ``extents``
(per axis ``{"start", "step", "count"}``), ``dtype`` and a free-form
``provenance`` mapping.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"WFTENSOR"
DTYPE = "complex128-le-interleaved"
FORMAT_VERSION = 1


def axis_extent(coords) -> dict:
    c = np.asarray(coords, dtype=float)
    step = float(c[1] - c[0]) if c.size > 1 else 0.0
    return {"start": float(c[0]), "step": step, "count": int(c.size)}


def write_tensor(path, values, axes, coords, provenance: dict | None = None) -> dict:
    values = np.asarray(values, dtype="<c16")
    if len(axes) != values.ndim or len(coords) != values.ndim:
        raise ValueError("need one axis name and one coordinate array per dimension")
    header = {
        "format": "wignerfio-tensor",
        "version": FORMAT_VERSION,
        "shape": list(values.shape),
        "axes": list(axes),
        "extents": [axis_extent(c) for c in coords],
        "dtype": DTYPE,
        "order": "row-major",
        "provenance": provenance or {},
    }
    raw = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(Path(path), "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<Q", len(raw)))
        fh.write(raw)
        fh.write(np.ascontiguousarray(values).tobytes(order="C"))
    return header


def read_tensor(path) -> tuple[np.ndarray, dict]:
    with open(Path(path), "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ValueError(f"{path} is not a wignerfio tensor file")
        (n,) = struct.unpack("<Q", fh.read(8))
        header = json.loads(fh.read(n).decode("utf-8"))
        payload = fh.read()
    if header.get("dtype") != DTYPE:
        raise ValueError(f"unsupported payload dtype {header.get('dtype')!r}")
    values = np.frombuffer(payload, dtype="<c16").reshape(header["shape"]).copy()
    return values, header
