"""Spectral feature computation: mel filterbanks, MFCCs, mel-cepstra.

All framing assumes 16 kHz input. MFCCs use 25 ms windows at a 10 ms hop
(100 Hz), 26 mel filters, 13 cepstra plus delta and delta-delta, then
per-utterance mean/variance normalization. Mel-cepstra use a 5 ms hop
(200 Hz) with 40 filters and 25 coefficients, unnormalized, for distortion
scoring.
"""

from __future__ import annotations

import numpy as np
from scipy.fft import dct, rfft

from .audio import TARGET_RATE
from .errors import AudioDecodeError

_EPS = 1e-10


def _hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f) / 700.0)


def _mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m) / 2595.0) - 1.0)


def mel_filterbank(n_filters: int, n_fft: int, rate: int = TARGET_RATE,
                   f_lo: float = 0.0, f_hi: float | None = None) -> np.ndarray:
    """(n_filters, n_fft//2 + 1) triangular filters on the mel scale."""
    f_hi = f_hi or rate / 2.0
    mels = np.linspace(_hz_to_mel(f_lo), _hz_to_mel(f_hi), n_filters + 2)
    bins = np.floor((n_fft + 1) * _mel_to_hz(mels) / rate).astype(int)
    fb = np.zeros((n_filters, n_fft // 2 + 1))
    for i in range(n_filters):
        lo, mid, hi = bins[i], bins[i + 1], bins[i + 2]
        for k in range(lo, mid):
            if mid > lo:
                fb[i, k] = (k - lo) / (mid - lo)
        for k in range(mid, hi):
            if hi > mid:
                fb[i, k] = (hi - k) / (hi - mid)
    return fb


def frame_signal(samples: np.ndarray, frame_len: int, hop: int) -> np.ndarray:
    if samples.size < frame_len:
        raise AudioDecodeError(
            f"audio of {samples.size} samples is shorter than one {frame_len}-sample frame")
    n = 1 + (samples.size - frame_len) // hop
    idx = np.arange(n)[:, None] * hop + np.arange(frame_len)[None, :]
    return samples[idx]


def log_mel_spectrogram(samples: np.ndarray, frame_len: int, hop: int,
                        n_fft: int, n_filters: int) -> np.ndarray:
    frames = frame_signal(samples, frame_len, hop) * np.hamming(frame_len)
    spec = np.abs(rfft(frames, n=n_fft, axis=1)) ** 2
    fb = mel_filterbank(n_filters, n_fft)
    return np.log(spec @ fb.T + _EPS)


def deltas(x: np.ndarray, width: int = 2) -> np.ndarray:
    """Regression deltas over +/-width frames, edges clamped."""
    denom = 2.0 * sum(n * n for n in range(1, width + 1))
    padded = np.concatenate([np.repeat(x[:1], width, axis=0), x,
                             np.repeat(x[-1:], width, axis=0)])
    out = np.zeros_like(x)
    for n in range(1, width + 1):
        out += n * (padded[width + n: width + n + len(x)]
                    - padded[width - n: width - n + len(x)])
    return out / denom


def mfcc_39(samples: np.ndarray) -> tuple[np.ndarray, float]:
    """(T, 39) normalized MFCC+deltas at 100 Hz."""
    logmel = log_mel_spectrogram(samples, frame_len=400, hop=160,
                                 n_fft=512, n_filters=26)
    ceps = dct(logmel, type=2, norm="ortho", axis=1)[:, :13]
    d1 = deltas(ceps)
    feats = np.hstack([ceps, d1, deltas(d1)])
    mean = feats.mean(axis=0)
    std = feats.std(axis=0)
    return (feats - mean) / np.maximum(std, _EPS), 100.0


def mcep_25(samples: np.ndarray) -> tuple[np.ndarray, float]:
    """(T, 25) mel-cepstra at 200 Hz (coefficient 0 carries energy)."""
    logmel = log_mel_spectrogram(samples, frame_len=400, hop=80,
                                 n_fft=512, n_filters=40)
    return dct(logmel, type=2, norm="ortho", axis=1)[:, :25], 200.0
