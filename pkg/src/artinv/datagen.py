"""Synthetic multi-speaker articulatory corpus with a known forward map.

Each speaker gets a quadratic palate dome, articulator rest positions, and a
full-rank mixing matrix. Utterances are smoothed random walks around the rest
positions (tongue clipped below the dome; lip separation driven by the
phoneme labels so "AE" frames are wide and "UW" frames narrow), and the
acoustic features are an affine image of the underlying tract variables plus
configurable noise, so a sufficiently expressive model can invert them almost
exactly. Emitted files use the same formats as real-data ingestion: EMA CSV,
AFM1 features, alignment TSV.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ShapeMismatch, ValidationError
from .ema_geometry import EmaTrack, PalateModel, TvTrack, derive_tvs, write_ema_csv
from .featio import FeatureMatrix, PhonemeAlignment, write_afm, write_alignment_tsv

_SENSORS = ("LI", "UL", "LL", "TT", "TB", "TD")
_REST = {  # nominal midsagittal positions, mm (x anterior+, y superior+)
    # tongue rest heights sit close under the palate dome so trajectories
    # regularly reach it; the fitted hull then tracks the true palate
    "LI": (2.0, -10.0),
    "UL": (12.0, 2.0),
    "LL": (11.0, -4.0),
    "TT": (8.0, 7.5),
    "TB": (0.0, 8.5),
    "TD": (-8.0, 7.5),
}
_LABEL_POOL = ("sil", "AA", "AE", "IY", "UW", "EH", "S", "T", "N", "M", "K")
_LIP_SEP = {"AE": 12.0, "UW": 2.5, "sil": 4.0}  # others drawn uniform


@dataclass
class GenConfig:
    frame_rate: float = 100.0
    acoustic_dim: int = 24
    noise_sigma: float = 0.01
    nonlinear: bool = False  # tanh squash on the forward map
    smooth_window: int = 5
    map_seed: int = 1234  # corpus-shared part of the forward map
    speaker_variation: float = 0.05  # relative size of per-speaker map deviations

    def base_map(self) -> tuple[np.ndarray, np.ndarray]:
        """Corpus-level mixing matrix and bias that all speakers perturb.

        Held-out-speaker inversion is only learnable because speakers share
        this base; per-speaker deviations stay proportional to
        ``speaker_variation``.
        """
        rng = np.random.default_rng(self.map_seed)
        mixing = rng.normal(0.0, 1.0, (self.acoustic_dim, 9)) / 3.0
        bias = rng.normal(0.0, 0.3, self.acoustic_dim)
        return mixing, bias


@dataclass
class SynthSpeaker:
    seed: object
    config: GenConfig
    dome_apex: tuple[float, float]   # (x, y) of the palate dome peak
    dome_curvature: float
    rest: dict[str, tuple[float, float]]
    amplitude: dict[str, float]      # per-sensor movement scale, mm
    lip_scale: float
    tv_center: np.ndarray            # (9,) canonical TV normalization
    tv_halfrange: np.ndarray         # (9,)
    mixing: np.ndarray               # (acoustic_dim, 9), full rank
    bias: np.ndarray                 # (acoustic_dim,)

    def dome_height(self, x) -> np.ndarray:
        ax, ay = self.dome_apex
        return ay - self.dome_curvature * (np.asarray(x) - ax) ** 2

    def palate(self, n_vertices: int = 25) -> PalateModel:
        """The true palate dome sampled over the tongue x-range."""
        xs = np.linspace(_REST["TD"][0] - 6.0, _REST["TT"][0] + 6.0, n_vertices)
        return PalateModel(np.column_stack([xs, self.dome_height(xs)]))

    def acoustics_from_tvs(self, tv: np.ndarray, rng: np.random.Generator | None = None
                           ) -> np.ndarray:
        """Forward map: normalized TVs -> acoustic frames (+ optional noise)."""
        z = (tv - self.tv_center) / self.tv_halfrange
        if self.config.nonlinear:
            z = np.tanh(z)
        out = z @ self.mixing.T + self.bias
        if rng is not None and self.config.noise_sigma > 0:
            out = out + rng.normal(0.0, self.config.noise_sigma, out.shape)
        return out

    def tvs_from_clean_acoustics(self, acoustic: np.ndarray) -> np.ndarray:
        """Inverse of the noiseless linear forward map (oracle for tests)."""
        if self.config.nonlinear:
            raise ValidationError("closed-form inverse only exists for the linear map")
        z = (acoustic - self.bias) @ np.linalg.pinv(self.mixing).T
        return z * self.tv_halfrange + self.tv_center


def gen_speaker(seed, config: GenConfig | None = None) -> SynthSpeaker:
    """Deterministic speaker from a seed; distinct seeds give distinct
    geometry and mixing matrices."""
    config = config or GenConfig()
    if config.acoustic_dim < 9:
        raise ShapeMismatch("acoustic_dim must be >= 9 for an invertible map")
    rng = np.random.default_rng(seed)
    apex_x = rng.uniform(-2.0, 2.0)
    apex_y = rng.uniform(11.5, 13.0)
    curvature = rng.uniform(0.015, 0.022)
    rest = {
        s: (x + rng.uniform(-0.6, 0.6), y + rng.uniform(-0.6, 0.6))
        for s, (x, y) in _REST.items()
    }
    amplitude = {s: rng.uniform(1.8, 2.6) for s in _SENSORS}
    lip_scale = rng.uniform(0.9, 1.1)
    base_mixing, base_bias = config.base_map()
    dev = config.speaker_variation
    mixing = base_mixing + dev * rng.normal(0.0, 1.0, base_mixing.shape) / 3.0
    if np.linalg.matrix_rank(mixing) != 9:
        raise ValidationError("mixing matrix is rank-deficient")  # Gaussian: ~never
    bias = base_bias + dev * rng.normal(0.0, 1.0, config.acoustic_dim)
    spk = SynthSpeaker(seed, config, (apex_x, apex_y), curvature, rest, amplitude,
                       lip_scale, np.zeros(9), np.ones(9), mixing, bias)
    for s in ("TT", "TB", "TD"):
        if spk.dome_height(rest[s][0]) <= rest[s][1]:
            raise ValidationError(f"palate dome not above resting {s}")
    # calibrate the canonical TV normalization on a probe utterance
    ema, align = _gen_motions(spk, 400, np.random.default_rng(rng.integers(2**63)))
    tv = _underlying_tvs(spk, ema)
    lo, hi = tv.frames.min(axis=0), tv.frames.max(axis=0)
    spk.tv_center = (hi + lo) / 2.0
    spk.tv_halfrange = np.maximum((hi - lo) / 2.0, 1e-3)
    return spk


def _smooth(x: np.ndarray, window: int) -> np.ndarray:
    if window <= 1:
        return x
    kernel = np.ones(window) / window
    if x.ndim == 1:
        return np.convolve(x, kernel, mode="same")
    return np.apply_along_axis(lambda c: np.convolve(c, kernel, mode="same"), 0, x)


def _ou_walk(rng: np.random.Generator, shape: tuple[int, ...], theta: float = 0.15
             ) -> np.ndarray:
    """Mean-reverting random walk with unit stationary variance; its ~1/theta
    frame timescale gives articulator-like slow wandering."""
    n = shape[0]
    sigma = math.sqrt(2.0 * theta - theta * theta)
    eps = rng.normal(0.0, sigma, shape)
    out = np.empty(shape)
    out[0] = rng.normal(0.0, 1.0, shape[1:])
    decay = 1.0 - theta
    for t in range(1, n):
        out[t] = out[t - 1] * decay + eps[t]
    return out


def _gen_alignment(n_frames: int, rate: float, rng: np.random.Generator) -> PhonemeAlignment:
    duration = n_frames / rate
    bounds = [0.0]
    while bounds[-1] < duration:
        bounds.append(bounds[-1] + rng.uniform(0.08, 0.35))
    bounds[-1] = duration
    k = len(bounds) - 1
    labels = [str(rng.choice(_LABEL_POOL)) for _ in range(k)]
    if k >= 2:  # guarantee the wide/narrow lip-aperture contrast
        i, j = rng.choice(k, size=2, replace=False)
        labels[i], labels[j] = "AE", "UW"
    return PhonemeAlignment(tuple(
        (bounds[i], bounds[i + 1], labels[i]) for i in range(k)))


def _lip_separation(align: PhonemeAlignment, n_frames: int, spk: SynthSpeaker,
                    rng: np.random.Generator) -> np.ndarray:
    rate = spk.config.frame_rate
    target = np.full(n_frames, 6.0)
    for start, end, label in align.intervals:
        sep = _LIP_SEP.get(label, rng.uniform(5.0, 9.0))
        lo = int(start * rate)
        hi = min(int(math.ceil(end * rate)), n_frames)
        target[lo:hi] = sep
    target = _smooth(target, 9) * spk.lip_scale
    target += _smooth(_ou_walk(rng, (n_frames,)), spk.config.smooth_window) * 0.5
    return np.maximum(target, 0.3)


def _gen_motions(spk: SynthSpeaker, n_frames: int, rng: np.random.Generator
                 ) -> tuple[EmaTrack, PhonemeAlignment]:
    cfg = spk.config
    align = _gen_alignment(n_frames, cfg.frame_rate, rng)
    frames = np.empty((n_frames, 12))
    walks = {}
    for s in _SENSORS:
        walk = _ou_walk(rng, (n_frames, 2))
        walks[s] = _smooth(walk, cfg.smooth_window) * spk.amplitude[s]
    sep = _lip_separation(align, n_frames, spk, rng)
    for i, s in enumerate(_SENSORS):
        rx, ry = spk.rest[s]
        xy = walks[s] + (rx, ry)
        if s in ("UL", "LL"):
            # lips: damp the x walk and drive the vertical separation from
            # the label-dependent target so LA carries the vowel contrast
            mid = (spk.rest["UL"][1] + spk.rest["LL"][1]) / 2.0
            xy[:, 0] = rx + walks[s][:, 0] * 0.2
            sign = 1.0 if s == "UL" else -1.0
            xy[:, 1] = mid + walks[s][:, 1] * 0.1 + sign * sep / 2.0
        if s in ("TT", "TB", "TD"):
            ceiling = spk.dome_height(xy[:, 0]) - 0.05
            xy[:, 1] = np.minimum(xy[:, 1], ceiling)
        frames[:, 2 * i: 2 * i + 2] = xy
    return EmaTrack(cfg.frame_rate, frames), align


def _underlying_tvs(spk: SynthSpeaker, ema: EmaTrack) -> TvTrack:
    return derive_tvs(ema, spk.palate(), lp_reference=spk.rest["UL"][0])


def gen_utterance(spk: SynthSpeaker, n_frames: int, rng: np.random.Generator
                  ) -> tuple[EmaTrack, FeatureMatrix, PhonemeAlignment]:
    """(EMA track, acoustic features, alignment) for one synthetic utterance."""
    if n_frames < 10:
        raise ShapeMismatch("utterances must have at least 10 frames")
    ema, align = _gen_motions(spk, n_frames, rng)
    tv = _underlying_tvs(spk, ema)
    acoustic = spk.acoustics_from_tvs(tv.frames, rng)
    return ema, FeatureMatrix(acoustic, spk.config.frame_rate), align


def allocate_utterances(total: int, n_speakers: int) -> list[int]:
    """Spread ``total`` utterances across speakers as evenly as possible."""
    base, extra = divmod(total, n_speakers)
    return [base + (1 if i < extra else 0) for i in range(n_speakers)]


def write_corpus(out_dir, n_speakers: int, utts: int | list[int], n_frames: int,
                 seed: int, config: GenConfig | None = None) -> list[str]:
    """Generate and write a corpus under ``out_dir``/spkNN/uttNNN.*; returns
    the speaker directory names."""
    config = config or GenConfig()
    counts = [utts] * n_speakers if isinstance(utts, int) else list(utts)
    if len(counts) != n_speakers:
        raise ShapeMismatch("one utterance count per speaker required")
    out = Path(out_dir)
    speaker_dirs = []
    for si in range(n_speakers):
        spk = gen_speaker([seed, si], config)
        spk_dir = out / f"spk{si:02d}"
        spk_dir.mkdir(parents=True, exist_ok=True)
        speaker_dirs.append(spk_dir.name)
        for ui in range(counts[si]):
            rng = np.random.default_rng([seed, si, ui])
            ema, feat, align = gen_utterance(spk, n_frames, rng)
            stem = spk_dir / f"utt{ui:03d}"
            write_ema_csv(f"{stem}.ema.csv", ema)
            write_afm(f"{stem}.feat.afm", feat)
            write_alignment_tsv(f"{stem}.align.tsv", align)
    return speaker_dirs
