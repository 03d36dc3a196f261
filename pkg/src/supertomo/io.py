"""Binary file formats: images, system matrices, and projection data.

Image format ("SRIM"): magic ``b"SRIM"``, u32 rows, u32 cols, then
rows*cols little-endian f64 values, row-major. Round-trips are bit-exact.

System-matrix format ("SRSM"): magic ``b"SRSM"``, u32 m, u32 n, then per row
a u32 entry count followed by that many (u32 index, f64 weight) pairs.

Projection data: a raw little-endian f64 array in ``<base>.f64`` plus a JSON
sidecar ``<base>.json`` describing the acquisition.

An 8-bit PGM export is provided for visual inspection only; it is never read
back.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .projector import ProjectionSystem, SparseRow

__all__ = [
    "MalformedFileError",
    "DimensionOverflowError",
    "save_image",
    "load_image",
    "save_pgm",
    "save_system",
    "load_system",
    "save_projections",
    "load_projections",
]

IMAGE_MAGIC = b"SRIM"
MATRIX_MAGIC = b"SRSM"

# Refuse images above 512 MiB of payload.
MAX_PIXELS = 1 << 26

_ENTRY_DTYPE = np.dtype([("index", "<u4"), ("weight", "<f8")])


class MalformedFileError(ValueError):
    """File contents do not match the expected format."""


class DimensionOverflowError(ValueError):
    """Declared dimensions are zero or implausibly large."""


def save_image(image, path):
    """Write a 2-D float64 image in the SRIM format."""
    image = np.ascontiguousarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {image.shape}")
    if not np.all(np.isfinite(image)):
        raise ValueError("image contains non-finite values")
    rows, cols = image.shape
    with open(path, "wb") as f:
        f.write(struct.pack("<4sII", IMAGE_MAGIC, rows, cols))
        f.write(image.astype("<f8").tobytes())


def load_image(path) -> np.ndarray:
    """Read an SRIM image file; the inverse of :func:`save_image`."""
    with open(path, "rb") as f:
        header = f.read(12)
        if len(header) != 12:
            raise MalformedFileError(f"{path}: truncated header")
        magic, rows, cols = struct.unpack("<4sII", header)
        if magic != IMAGE_MAGIC:
            raise MalformedFileError(f"{path}: bad magic {magic!r}")
        if rows == 0 or cols == 0 or rows * cols > MAX_PIXELS:
            raise DimensionOverflowError(f"{path}: unusable dimensions {rows}x{cols}")
        payload = f.read(8 * rows * cols + 1)
    if len(payload) != 8 * rows * cols:
        raise MalformedFileError(f"{path}: payload size does not match header")
    image = np.frombuffer(payload, dtype="<f8").reshape(rows, cols).astype(np.float64)
    if not np.all(np.isfinite(image)):
        raise MalformedFileError(f"{path}: non-finite pixel values")
    return image


def save_pgm(image, path):
    """Write an 8-bit PGM preview, affinely mapping [min, max] to [0, 255]."""
    image = np.asarray(image, dtype=np.float64)
    if image.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {image.shape}")
    lo, hi = float(image.min()), float(image.max())
    if hi > lo:
        scaled = (image - lo) * (255.0 / (hi - lo))
    else:
        scaled = np.zeros_like(image)
    data = np.rint(scaled).clip(0, 255).astype(np.uint8)
    rows, cols = image.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{cols} {rows}\n255\n".encode("ascii"))
        f.write(data.tobytes())


def save_system(system: ProjectionSystem, path):
    """Write a ProjectionSystem's matrix in the SRSM format."""
    with open(path, "wb") as f:
        f.write(struct.pack("<4sII", MATRIX_MAGIC, system.m, system.n))
        for row in system.rows:
            f.write(struct.pack("<I", row.nnz))
            if row.nnz:
                entries = np.empty(row.nnz, dtype=_ENTRY_DTYPE)
                entries["index"] = row.indices
                entries["weight"] = row.weights
                f.write(entries.tobytes())


def load_system(path):
    """Read an SRSM file. Returns ``(rows, (m, n))`` with rows as SparseRow."""
    with open(path, "rb") as f:
        data = f.read()
    if len(data) < 12:
        raise MalformedFileError(f"{path}: truncated header")
    magic, m, n = struct.unpack_from("<4sII", data, 0)
    if magic != MATRIX_MAGIC:
        raise MalformedFileError(f"{path}: bad magic {magic!r}")
    if n == 0 or n > MAX_PIXELS:
        raise DimensionOverflowError(f"{path}: unusable column count {n}")
    rows = []
    pos = 12
    for _ in range(m):
        if pos + 4 > len(data):
            raise MalformedFileError(f"{path}: truncated row header")
        (nnz,) = struct.unpack_from("<I", data, pos)
        pos += 4
        end = pos + nnz * _ENTRY_DTYPE.itemsize
        if end > len(data):
            raise MalformedFileError(f"{path}: truncated row data")
        entries = np.frombuffer(data, dtype=_ENTRY_DTYPE, count=nnz, offset=pos)
        rows.append(SparseRow(entries["index"].astype(np.int64),
                              entries["weight"].astype(np.float64)))
        pos = end
    if pos != len(data):
        raise MalformedFileError(f"{path}: trailing bytes")
    return rows, (m, n)


def _projection_base(path) -> Path:
    path = Path(path)
    if path.suffix in (".f64", ".json"):
        return path.with_suffix("")
    return path


def save_projections(b, path, meta: dict):
    """Write measurements as ``<base>.f64`` plus a JSON sidecar ``<base>.json``."""
    base = _projection_base(path)
    b = np.asarray(b, dtype=np.float64)
    if b.ndim != 1:
        raise ValueError(f"expected a 1-D measurement vector, got shape {b.shape}")
    meta = dict(meta)
    meta["m"] = int(b.size)
    with open(base.with_suffix(".f64"), "wb") as f:
        f.write(b.astype("<f8").tobytes())
    with open(base.with_suffix(".json"), "w", encoding="ascii") as f:
        json.dump(meta, f, indent=2, sort_keys=True)
        f.write("\n")


def load_projections(path):
    """Read a projection pair written by :func:`save_projections`.

    Returns ``(b, meta)``. The sidecar's ``m`` must match the payload length.
    """
    base = _projection_base(path)
    with open(base.with_suffix(".json"), "r", encoding="ascii") as f:
        try:
            meta = json.load(f)
        except json.JSONDecodeError as exc:
            raise MalformedFileError(f"{base}.json: invalid JSON ({exc})") from exc
    with open(base.with_suffix(".f64"), "rb") as f:
        raw = f.read()
    if len(raw) % 8:
        raise MalformedFileError(f"{base}.f64: size is not a multiple of 8")
    b = np.frombuffer(raw, dtype="<f8").astype(np.float64)
    if "m" in meta and int(meta["m"]) != b.size:
        raise MalformedFileError(
            f"{base}: sidecar m={meta['m']} does not match payload length {b.size}"
        )
    return b, meta
