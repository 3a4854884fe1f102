"""On-disk carriers for score matrices and label sets.

Score matrices travel in a small binary container (magic ``GXSM``, version 1,
little-endian, float32 row-major) because N*K can reach tens of millions of
floats; a CSV fallback exists for small tests.  Labels travel as UTF-8 CSV
with header ``index,label``, rows in labeling order.
"""

from __future__ import annotations

import csv
import struct
from pathlib import Path

import numpy as np

from .core import FormatError

MAGIC = b"GXSM"
VERSION = 1
_HEADER = struct.Struct("<4sHHQQ")  # magic, version, reserved, N, K


def write_scores(path: str | Path, scores: np.ndarray) -> None:
    """Write an N x K score matrix in the GXSM binary layout."""
    arr = np.ascontiguousarray(scores, dtype="<f4")
    if arr.ndim != 2:
        raise FormatError(f"score matrix must be 2-D, got shape {arr.shape}")
    n, k = arr.shape
    with open(path, "wb") as f:
        f.write(_HEADER.pack(MAGIC, VERSION, 0, n, k))
        f.write(arr.tobytes())


def read_scores(path: str | Path) -> np.ndarray:
    """Read a GXSM file back into a float64 matrix (exact from float32)."""
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FormatError(
            f"{path}: file too short for a GXSM header ({len(data)} bytes)"
        )
    magic, version, _reserved, n, k = _HEADER.unpack_from(data)
    if magic != MAGIC:
        raise FormatError(f"{path}: bad magic {magic!r}, expected {MAGIC!r}")
    if version != VERSION:
        raise FormatError(f"{path}: unsupported version {version}")
    expected = _HEADER.size + 4 * n * k
    if len(data) != expected:
        raise FormatError(
            f"{path}: expected {expected} bytes for N={n}, K={k}, got {len(data)}"
        )
    arr = np.frombuffer(data, dtype="<f4", offset=_HEADER.size).reshape(n, k)
    return arr.astype(np.float64)


def read_scores_csv(path: str | Path) -> np.ndarray:
    """CSV fallback: one row of K probabilities per example, no header."""
    try:
        arr = np.loadtxt(path, delimiter=",", dtype=np.float64, ndmin=2)
    except ValueError as e:
        raise FormatError(f"{path}: not a numeric CSV matrix ({e})") from e
    return arr


def read_labels_csv(path: str | Path, n: int | None = None, k: int | None = None) -> list[tuple[int, int]]:
    """Read ``index,label`` rows, preserving order; validates the header,
    uniqueness and ranges."""
    pairs: list[tuple[int, int]] = []
    seen: set[int] = set()
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["index", "label"]:
            raise FormatError(f"{path}: expected header 'index,label', got {header}")
        for row in reader:
            if not row:
                continue
            try:
                idx, lbl = int(row[0]), int(row[1])
            except (ValueError, IndexError) as e:
                raise FormatError(f"{path}: malformed row {row}") from e
            if idx in seen:
                raise FormatError(f"{path}: duplicate index {idx}")
            if idx < 0 or (n is not None and idx >= n):
                raise FormatError(f"{path}: index {idx} out of range")
            if lbl < 0 or (k is not None and lbl >= k):
                raise FormatError(f"{path}: label {lbl} out of range")
            seen.add(idx)
            pairs.append((idx, lbl))
    return pairs


def write_labels_csv(path: str | Path, pairs) -> None:
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["index", "label"])
        for idx, lbl in pairs:
            writer.writerow([idx, lbl])
