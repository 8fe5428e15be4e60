import math
import os
import wave

import numpy as np
import pytest

for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
    os.environ.setdefault(var, "1")


def write_wav(path, samples: np.ndarray, rate: int, channels: int = 1):
    pcm = np.clip(samples * 32767.0, -32768, 32767).astype("<i2")
    if channels == 2:
        pcm = np.column_stack([pcm, pcm]).ravel()
    with wave.open(str(path), "wb") as w:
        w.setnchannels(channels)
        w.setsampwidth(2)
        w.setframerate(rate)
        w.writeframes(pcm.tobytes())


@pytest.fixture(scope="session")
def clips(tmp_path_factory):
    """Three synthesized public-domain test clips, one deliberately stereo
    at a non-target rate to exercise the resampling path."""
    d = tmp_path_factory.mktemp("clips")
    rng = np.random.default_rng(42)

    t = np.arange(16000) / 16000.0
    tone = 0.5 * np.sin(2 * math.pi * 220 * t) * np.hanning(t.size)
    write_wav(d / "tone.wav", tone, 16000)

    t2 = np.arange(int(1.4 * 16000)) / 16000.0
    chirp = 0.4 * np.sin(2 * math.pi * (200 + 600 * t2) * t2)
    chirp += 0.05 * rng.standard_normal(t2.size)
    write_wav(d / "chirp.wav", chirp, 16000)

    t3 = np.arange(int(1.1 * 22050)) / 22050.0
    hum = 0.3 * np.sin(2 * math.pi * 150 * t3) + 0.1 * rng.standard_normal(t3.size)
    write_wav(d / "hum22k_stereo.wav", hum, 22050, channels=2)
    return d
