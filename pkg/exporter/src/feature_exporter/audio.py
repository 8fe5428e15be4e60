"""WAV reading and resampling to the 16 kHz mono working format."""

from __future__ import annotations

import math
import wave
from pathlib import Path

import numpy as np
from scipy.signal import resample_poly

from .errors import AudioDecodeError

TARGET_RATE = 16000

_WIDTH_SCALE = {1: 128.0, 2: 32768.0, 4: 2147483648.0}


def read_wav_16k(path) -> np.ndarray:
    """Float64 mono samples in [-1, 1] at 16 kHz; stereo is averaged and
    other sample rates are polyphase-resampled."""
    try:
        with wave.open(str(path), "rb") as w:
            n_channels = w.getnchannels()
            width = w.getsampwidth()
            rate = w.getframerate()
            n_frames = w.getnframes()
            raw = w.readframes(n_frames)
    except (wave.Error, EOFError, OSError) as exc:
        raise AudioDecodeError(f"{path}: {exc}") from exc
    if n_frames == 0:
        raise AudioDecodeError(f"{path}: zero-length audio")
    if width == 1:  # unsigned 8-bit
        samples = np.frombuffer(raw, dtype=np.uint8).astype(np.float64) - 128.0
    elif width == 2:
        samples = np.frombuffer(raw, dtype="<i2").astype(np.float64)
    elif width == 4:
        samples = np.frombuffer(raw, dtype="<i4").astype(np.float64)
    else:
        raise AudioDecodeError(f"{path}: unsupported sample width {width}")
    samples /= _WIDTH_SCALE[width]
    if n_channels > 1:
        samples = samples.reshape(-1, n_channels).mean(axis=1)
    if rate != TARGET_RATE:
        g = math.gcd(rate, TARGET_RATE)
        samples = resample_poly(samples, TARGET_RATE // g, rate // g)
    if samples.size == 0:
        raise AudioDecodeError(f"{path}: empty after resampling")
    return samples


def list_audio_files(audio_dir) -> list[Path]:
    root = Path(audio_dir)
    if not root.is_dir():
        raise AudioDecodeError(f"{root} is not a directory")
    return sorted(root.glob("*.wav"))
