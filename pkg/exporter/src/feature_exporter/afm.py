"""Writer for the AFM1 interchange format.

Layout (little-endian): magic ``AFM1``, u32 version = 1, u32 n_frames,
u32 n_dims, f64 frame_rate_hz, then n_frames * n_dims float32 row-major.
This mirrors the consumer-side definition so exported files load directly
into the inversion toolkit.
"""

from __future__ import annotations

import struct

import numpy as np

_HEADER = struct.Struct("<4sIIId")
_MAGIC = b"AFM1"
_VERSION = 1


def write_afm(path, data: np.ndarray, frame_rate: float) -> None:
    arr = np.asarray(data, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError(f"AFM payload must be 2-D, got {arr.shape}")
    payload = arr.astype("<f4")
    if not np.isfinite(payload).all():
        raise ValueError("AFM payload must be float32-finite")
    with open(path, "wb") as f:
        f.write(_HEADER.pack(_MAGIC, _VERSION, arr.shape[0], arr.shape[1], frame_rate))
        f.write(payload.tobytes(order="C"))


def read_afm(path) -> tuple[np.ndarray, float]:
    with open(path, "rb") as f:
        raw = f.read()
    magic, version, n, d, rate = _HEADER.unpack_from(raw)
    if magic != _MAGIC or version != _VERSION:
        raise ValueError(f"{path}: not an AFM1 file")
    data = np.frombuffer(raw, dtype="<f4", count=n * d, offset=_HEADER.size)
    return data.astype(np.float64).reshape(n, d), rate
