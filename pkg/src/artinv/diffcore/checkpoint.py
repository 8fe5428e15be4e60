"""Versioned binary checkpoint container.

Layout (little-endian), mirroring the AFM1 conventions:

    magic ``ACP1`` (4 bytes), u32 version = 1,
    u32 config_len, config text (UTF-8),
    32-byte SHA-256 of the config text,
    u32 n_entries, then per entry:
        u16 name_len, name (UTF-8),
        u8 kind (0 = buffer, 1 = parameter),
        u8 ndim, u32 dims...,
        f64 values, row-major;
        parameters additionally carry u64 step, f64 first-moment values,
        f64 second-moment values.

Entries are written in sorted-name order so files are byte-stable.
"""

from __future__ import annotations

import hashlib
import struct
from dataclasses import dataclass

import numpy as np

from ..errors import BadMagic, Truncated
from .tensor import Parameter

_MAGIC = b"ACP1"
_VERSION = 1


@dataclass
class Checkpoint:
    config_text: str
    config_sha256: bytes
    params: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray, int]]  # value, m, v, step
    buffers: dict[str, np.ndarray]


def config_hash(config_text: str) -> bytes:
    return hashlib.sha256(config_text.encode("utf-8")).digest()


def _write_array(f, arr: np.ndarray) -> None:
    f.write(arr.astype("<f8").tobytes(order="C"))


def save_checkpoint(path, config_text: str, params: dict[str, Parameter],
                    buffers: dict[str, np.ndarray] | None = None) -> None:
    buffers = buffers or {}
    cfg = config_text.encode("utf-8")
    entries = [(name, "param", p) for name, p in params.items()]
    entries += [(name, "buffer", b) for name, b in buffers.items()]
    entries.sort(key=lambda e: e[0])
    with open(path, "wb") as f:
        f.write(_MAGIC)
        f.write(struct.pack("<I", _VERSION))
        f.write(struct.pack("<I", len(cfg)))
        f.write(cfg)
        f.write(config_hash(config_text))
        f.write(struct.pack("<I", len(entries)))
        for name, kind, obj in entries:
            nb = name.encode("utf-8")
            f.write(struct.pack("<H", len(nb)))
            f.write(nb)
            arr = obj.data if kind == "param" else np.asarray(obj)
            f.write(struct.pack("<BB", 1 if kind == "param" else 0, arr.ndim))
            f.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            _write_array(f, arr)
            if kind == "param":
                f.write(struct.pack("<Q", obj.step))
                _write_array(f, obj.m)
                _write_array(f, obj.v)


class _Reader:
    def __init__(self, raw: bytes, path):
        self.raw = raw
        self.pos = 0
        self.path = path

    def read(self, n: int) -> bytes:
        if self.pos + n > len(self.raw):
            raise Truncated(f"{self.path}: checkpoint ends mid-record")
        out = self.raw[self.pos: self.pos + n]
        self.pos += n
        return out

    def unpack(self, fmt: str):
        return struct.unpack(fmt, self.read(struct.calcsize(fmt)))

    def array(self, shape) -> np.ndarray:
        count = int(np.prod(shape, dtype=np.int64)) if shape else 1
        flat = np.frombuffer(self.read(8 * count), dtype="<f8").astype(np.float64)
        return flat.reshape(shape)


def load_checkpoint(path) -> Checkpoint:
    with open(path, "rb") as f:
        raw = f.read()
    r = _Reader(raw, path)
    if r.read(4) != _MAGIC:
        raise BadMagic(f"{path}: not an ACP1 checkpoint")
    (version,) = r.unpack("<I")
    if version != _VERSION:
        raise BadMagic(f"{path}: unsupported checkpoint version {version}")
    (cfg_len,) = r.unpack("<I")
    config_text = r.read(cfg_len).decode("utf-8")
    sha = r.read(32)
    if sha != config_hash(config_text):
        raise BadMagic(f"{path}: config hash mismatch")
    (n_entries,) = r.unpack("<I")
    params: dict[str, tuple[np.ndarray, np.ndarray, np.ndarray, int]] = {}
    buffers: dict[str, np.ndarray] = {}
    for _ in range(n_entries):
        (name_len,) = r.unpack("<H")
        name = r.read(name_len).decode("utf-8")
        kind, ndim = r.unpack("<BB")
        shape = tuple(r.unpack(f"<{ndim}I")) if ndim else ()
        value = r.array(shape)
        if kind == 1:
            (step,) = r.unpack("<Q")
            m = r.array(shape)
            v = r.array(shape)
            params[name] = (value, m, v, step)
        else:
            buffers[name] = value
    return Checkpoint(config_text, sha, params, buffers)


def restore_into(ckpt: Checkpoint, params: dict[str, Parameter],
                 set_buffer) -> None:
    """Copy checkpoint state into live parameters (names must match exactly)."""
    if set(ckpt.params) != set(params):
        missing = set(params) ^ set(ckpt.params)
        raise BadMagic(f"parameter names do not match checkpoint: {sorted(missing)}")
    for name, p in params.items():
        value, m, v, step = ckpt.params[name]
        if value.shape != p.data.shape:
            raise BadMagic(f"shape mismatch for {name!r}: {value.shape} vs {p.data.shape}")
        p.data, p.m, p.v, p.step = value, m, v, step
    for name, buf in ckpt.buffers.items():
        set_buffer(name, buf)
