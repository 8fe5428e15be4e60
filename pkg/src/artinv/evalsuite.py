"""Evaluation metrics: Pearson correlation, per-phoneme L1, dynamic time
warping, mel-cepstral distortion, vowel lip-aperture summaries, and
frame-level phoneme accuracy.

Mean PCC across channels is the unweighted average of per-channel
correlations over concatenated test frames. MCD excludes the 0th (energy)
cepstral coefficient and by default expects 25-dim mel-cepstra; the DTW
alignment cost for DTW-MCD is the frame-MCD itself, so the reported value is
minimized along the chosen path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DimMismatch,
    LengthMismatch,
    NoVowelFrames,
    ShapeMismatch,
    ZeroVariance,
)
from . import featio
from .featio import N_PM_SLOTS, PhonemeAlignment, VOWELS, frame_labels, inventory

__all__ = [
    "pearson", "mean_pcc", "per_phoneme_l1", "dtw", "mcd", "dtw_mcd",
    "vowel_la_summary", "VowelLaStats", "phoneme_accuracy", "EvalReport",
    "format_l1_comparison", "format_mcd_comparison",
    "LengthMismatch", "ZeroVariance", "DimMismatch", "NoVowelFrames",
]

_MCD_SCALE = 10.0 / math.log(10.0)


def pearson(x, y) -> float:
    """Sample correlation coefficient of two equal-length series."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise LengthMismatch(f"series shapes differ: {x.shape} vs {y.shape}")
    if x.size < 2:
        raise ZeroVariance("correlation needs at least 2 samples")
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise ZeroVariance("constant series has no correlation")
    return float(xc @ yc) / denom


def mean_pcc(pred: np.ndarray, true: np.ndarray) -> tuple[np.ndarray, float]:
    """(per-channel PCC, unweighted mean) over concatenated frames."""
    pred = np.asarray(pred, dtype=np.float64)
    true = np.asarray(true, dtype=np.float64)
    if pred.shape != true.shape or pred.ndim != 2:
        raise LengthMismatch(f"matrix shapes differ: {pred.shape} vs {true.shape}")
    per = np.array([pearson(pred[:, c], true[:, c]) for c in range(pred.shape[1])])
    return per, float(per.mean())


def per_phoneme_l1(pred: np.ndarray, true: np.ndarray, align: PhonemeAlignment,
                   rate: float) -> dict[str, float]:
    """Mean |pred - true| over (frames x channels), per phoneme label.

    Every frame belongs to exactly one label (uncovered frames count as
    "sil"), so the frame-count-weighted mean over labels equals the global
    MAE.
    """
    pred = np.asarray(pred, dtype=np.float64)
    true = np.asarray(true, dtype=np.float64)
    if pred.shape != true.shape:
        raise LengthMismatch(f"shapes differ: {pred.shape} vs {true.shape}")
    ids = frame_labels(align, rate, pred.shape[0])
    err = np.abs(pred - true).mean(axis=1)
    out: dict[str, float] = {}
    for cid in np.unique(ids):
        out[featio.phoneme_label(int(cid))] = float(err[ids == cid].mean())
    return out


def phoneme_frame_counts(align: PhonemeAlignment, rate: float, n_frames: int) -> dict[str, int]:
    ids = frame_labels(align, rate, n_frames)
    uniq, counts = np.unique(ids, return_counts=True)
    return {featio.phoneme_label(int(c)): int(n) for c, n in zip(uniq, counts)}


def _dtw_on_matrix(d: np.ndarray) -> tuple[list[tuple[int, int]], float]:
    n, m = d.shape
    acc = np.full((n, m), np.inf)
    acc[0, 0] = d[0, 0]
    acc[0, 1:] = d[0, 1:].cumsum() + d[0, 0]
    acc[1:, 0] = d[1:, 0].cumsum() + d[0, 0]
    for i in range(1, n):
        prev_row, row = acc[i - 1], acc[i]
        for j in range(1, m):
            row[j] = d[i, j] + min(prev_row[j - 1], prev_row[j], row[j - 1])
    path = [(n - 1, m - 1)]
    i, j = n - 1, m - 1
    while (i, j) != (0, 0):
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, up, left = acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1]
            if diag <= up and diag <= left:
                i, j = i - 1, j - 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        path.append((i, j))
    path.reverse()
    return path, float(acc[n - 1, m - 1])


def dtw(a: np.ndarray, b: np.ndarray, frame_cost=None) -> tuple[list[tuple[int, int]], float]:
    """Minimal-cost monotone alignment of two frame sequences.

    Steps are (1,1), (1,0), (0,1) over (i, j); both endpoint pairs are on the
    path; the total cost is the sum of frame costs over every path node;
    ``frame_cost`` defaults to Euclidean distance. Ties during traceback
    prefer (1,1), then (1,0).
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise DimMismatch(f"frame dims differ: {a.shape} vs {b.shape}")
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise LengthMismatch("cannot align an empty sequence")
    if frame_cost is None:
        d = np.sqrt(((a[:, None, :] - b[None, :, :]) ** 2).sum(axis=2))
    else:
        d = np.array([[frame_cost(ai, bj) for bj in b] for ai in a], dtype=np.float64)
    return _dtw_on_matrix(d)


def mcd(c_a: np.ndarray, c_b: np.ndarray) -> float:
    """Mel-cepstral distortion in dB between two cepstral frames: the caller
    supplies frames with the energy coefficient already dropped."""
    c_a = np.asarray(c_a, dtype=np.float64)
    c_b = np.asarray(c_b, dtype=np.float64)
    if c_a.shape != c_b.shape or c_a.ndim != 1:
        raise DimMismatch(f"cepstral frames differ: {c_a.shape} vs {c_b.shape}")
    return _MCD_SCALE * math.sqrt(2.0 * float(((c_a - c_b) ** 2).sum()))


def dtw_mcd(A: np.ndarray, B: np.ndarray, exclude_c0: bool = True) -> float:
    """Mean frame-MCD along the DTW path whose alignment cost is frame-MCD."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[1]:
        raise DimMismatch(f"mel-cepstra dims differ: {A.shape} vs {B.shape}")
    if A.shape[0] == 0 or B.shape[0] == 0:
        raise LengthMismatch("cannot align an empty sequence")
    if exclude_c0:
        A, B = A[:, 1:], B[:, 1:]
    # frame-MCD is a scaled Euclidean distance, so the cost matrix vectorizes
    d = _MCD_SCALE * np.sqrt(2.0 * ((A[:, None, :] - B[None, :, :]) ** 2).sum(axis=2))
    path, total = _dtw_on_matrix(d)
    return total / len(path)


@dataclass
class VowelLaStats:
    per_speaker: dict[str, float]
    mean: float
    variance: float  # population variance across speakers


def vowel_la_summary(items: list[tuple[str, np.ndarray, PhonemeAlignment, float]],
                     vowels: list[str] | None = None) -> dict[str, VowelLaStats]:
    """Per-vowel lip-aperture summary across speakers.

    ``items`` are (speaker, normalized TV frames, alignment, frame rate)
    tuples; LA is channel 0. For each vowel, the per-speaker mean LA over
    frames carrying that vowel is reduced to a cross-speaker mean and
    population variance. Requesting a vowel with no frames raises
    NoVowelFrames; with ``vowels=None`` all vowels present are summarized.
    """
    sums: dict[str, dict[str, tuple[float, int]]] = {}
    for speaker, tv, align, rate in items:
        tv = np.asarray(tv, dtype=np.float64)
        ids = frame_labels(align, rate, tv.shape[0])
        for cid in np.unique(ids):
            label = featio.phoneme_label(int(cid))
            if label not in VOWELS:
                continue
            mask = ids == cid
            s, n = sums.setdefault(label, {}).get(speaker, (0.0, 0))
            sums[label][speaker] = (s + float(tv[mask, 0].sum()), n + int(mask.sum()))
    requested = sorted(set(sums)) if vowels is None else list(vowels)
    if not requested:
        raise NoVowelFrames("no vowel frames in the supplied data")
    out: dict[str, VowelLaStats] = {}
    for vowel in requested:
        if vowel not in sums:
            raise NoVowelFrames(f"no frames labeled {vowel!r}")
        per_speaker = {spk: s / n for spk, (s, n) in sums[vowel].items()}
        vals = np.array(list(per_speaker.values()))
        out[vowel] = VowelLaStats(per_speaker, float(vals.mean()), float(vals.var()))
    return out


def phoneme_accuracy(pred: np.ndarray, labels: np.ndarray) -> float:
    """Frame accuracy: argmax over 41 logits, or nearest inventory row for
    18-dim slot predictions (ties resolve to the smallest class id)."""
    pred = np.asarray(pred, dtype=np.float64)
    labels = np.asarray(labels)
    if pred.ndim != 2 or labels.shape != (pred.shape[0],):
        raise LengthMismatch(f"predictions {pred.shape} do not align with labels {labels.shape}")
    if pred.shape[0] == 0:
        raise LengthMismatch("no frames to score")
    if pred.shape[1] == featio.N_PHONEME_CLASSES:
        chosen = pred.argmax(axis=1)
    elif pred.shape[1] == N_PM_SLOTS:
        table = inventory().pm_vectors  # (41, 18)
        d2 = ((pred[:, None, :] - table[None, :, :]) ** 2).sum(axis=2)
        chosen = d2.argmin(axis=1)
    else:
        raise ShapeMismatch(f"expected 41 logits or 18 slots, got {pred.shape[1]} dims")
    return float((chosen == labels).mean())


# --- reports ------------------------------------------------------------------

@dataclass
class EvalReport:
    per_channel_pcc: dict[str, float] = field(default_factory=dict)
    mean_pcc: float = float("nan")
    per_phoneme_l1: dict[str, float] = field(default_factory=dict)
    phoneme_acc: float | None = None
    dtw_mcd_per_utt: dict[str, float] = field(default_factory=dict)

    def mcd_mean_std(self) -> tuple[float, float]:
        vals = np.array(list(self.dtw_mcd_per_utt.values()))
        return float(vals.mean()), float(vals.std())

    def write_tsvs(self, prefix: str) -> list[str]:
        """Write one TSV per populated section; returns the paths."""
        paths = []
        if self.per_channel_pcc:
            p = f"{prefix}pcc.tsv"
            with open(p, "w", encoding="utf-8") as f:
                f.write("channel\tpcc\n")
                for ch, r in self.per_channel_pcc.items():
                    f.write(f"{ch}\t{r:.6f}\n")
                f.write(f"MEAN\t{self.mean_pcc:.6f}\n")
            paths.append(p)
        if self.per_phoneme_l1:
            p = f"{prefix}per_phoneme_l1.tsv"
            with open(p, "w", encoding="utf-8") as f:
                f.write("phoneme\tl1\n")
                for label in sorted(self.per_phoneme_l1):
                    f.write(f"{label}\t{self.per_phoneme_l1[label]:.6f}\n")
            paths.append(p)
        if self.phoneme_acc is not None:
            p = f"{prefix}phoneme_acc.tsv"
            with open(p, "w", encoding="utf-8") as f:
                f.write("metric\tvalue\n")
                f.write(f"frame_accuracy\t{self.phoneme_acc:.6f}\n")
            paths.append(p)
        if self.dtw_mcd_per_utt:
            p = f"{prefix}dtw_mcd.tsv"
            mean, std = self.mcd_mean_std()
            with open(p, "w", encoding="utf-8") as f:
                f.write("utterance\tmcd_db\n")
                for utt in sorted(self.dtw_mcd_per_utt):
                    f.write(f"{utt}\t{self.dtw_mcd_per_utt[utt]:.6f}\n")
                f.write(f"MEAN\t{mean:.6f}\n")
                f.write(f"STD\t{std:.6f}\n")
            paths.append(p)
        return paths


def format_l1_comparison(baseline: dict[str, float], ours: dict[str, float]) -> str:
    """Side-by-side per-phoneme L1 table: phoneme, baseline, ours, diff."""
    lines = ["phoneme\tbaseline\tours\tdiff"]
    for label in sorted(set(baseline) & set(ours)):
        b, o = baseline[label], ours[label]
        lines.append(f"{label}\t{b:.3f}\t{o:.3f}\t{b - o:.3f}")
    return "\n".join(lines) + "\n"


def format_mcd_comparison(baseline: dict[str, float], ours: dict[str, float]) -> str:
    """Side-by-side per-speaker DTW-MCD table with mean +/- stdev rows."""
    lines = ["speaker\tbaseline\tours"]
    for spk in sorted(set(baseline) & set(ours)):
        lines.append(f"{spk}\t{baseline[spk]:.2f}\t{ours[spk]:.2f}")
    b = np.array(list(baseline.values()))
    o = np.array(list(ours.values()))
    lines.append(f"AVERAGE\t{b.mean():.2f} +/- {b.std():.2f}\t{o.mean():.2f} +/- {o.std():.2f}")
    return "\n".join(lines) + "\n"
