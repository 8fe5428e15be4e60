"""EMA sensor geometry: palate estimation and tract-variable derivation.

The palate is approximated by the upper envelope (upper convex-hull chain) of
a speaker's pooled tongue positions; constriction degree/location for each
tongue sensor is its Euclidean distance to that polyline and the x-coordinate
of the nearest polyline point. All geometry is double precision with 1e-9
absolute tolerances.

EMA CSV format: header ``time,LIx,LIy,ULx,ULy,LLx,LLy,TTx,TTy,TBx,TBy,TDx,TDy``,
one frame per row, time in seconds strictly increasing at a uniform rate.
Palate CSV: header ``x,y``, one vertex per row, strictly increasing x.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    BadRate,
    ConstantChannel,
    DegenerateCloud,
    EmptyInput,
    NonFinite,
    ShapeMismatch,
    ValidationError,
)
from .featio import FeatureMatrix

EMA_CHANNELS = (
    "LIx", "LIy", "ULx", "ULy", "LLx", "LLy",
    "TTx", "TTy", "TBx", "TBy", "TDx", "TDy",
)
TV_CHANNELS = ("LA", "LP", "JA", "TTCL", "TTCD", "TBCL", "TBCD", "TDCL", "TDCD")

# (x, y) column pairs in EMA frame order
_LI, _UL, _LL, _TT, _TB, _TD = (slice(2 * i, 2 * i + 2) for i in range(6))

_TOL = 1e-9


@dataclass(frozen=True)
class EmaTrack:
    """12-channel midsagittal sensor trajectory in millimeters."""

    frame_rate: float
    frames: np.ndarray  # (n, 12)

    def __post_init__(self):
        arr = np.asarray(self.frames, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != len(EMA_CHANNELS):
            raise ShapeMismatch(f"EMA frames must be (n, 12), got {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFinite("EMA frames contain NaN or inf")
        if not (self.frame_rate > 0 and math.isfinite(self.frame_rate)):
            raise BadRate(f"frame rate must be positive, got {self.frame_rate}")
        object.__setattr__(self, "frames", arr)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    def tongue_points(self) -> np.ndarray:
        """Pooled (x, y) positions of tongue tip, body, and dorsum, (3n, 2)."""
        return np.vstack([self.frames[:, _TT], self.frames[:, _TB], self.frames[:, _TD]])


@dataclass(frozen=True)
class PalateModel:
    """Concave-down polyline with strictly increasing x (an upper hull)."""

    vertices: np.ndarray  # (m, 2)

    def __post_init__(self):
        v = np.asarray(self.vertices, dtype=np.float64)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 2:
            raise ValidationError(f"palate needs >= 2 (x, y) vertices, got shape {v.shape}")
        if not np.isfinite(v).all():
            raise NonFinite("palate vertices contain NaN or inf")
        if not (np.diff(v[:, 0]) > 0).all():
            raise ValidationError("palate x coordinates must be strictly increasing")
        # concave-down: each interior vertex on or above the chord of its neighbors
        for i in range(1, v.shape[0] - 1):
            a, b, c = v[i - 1], v[i], v[i + 1]
            t = (b[0] - a[0]) / (c[0] - a[0])
            chord_y = a[1] + t * (c[1] - a[1])
            if b[1] < chord_y - _TOL:
                raise ValidationError("palate polyline is not concave-down")
        object.__setattr__(self, "vertices", v)

    def height_at(self, x: float) -> float:
        """Polyline y at x (clamped to the end vertices outside the x-range)."""
        v = self.vertices
        return float(np.interp(x, v[:, 0], v[:, 1]))


@dataclass(frozen=True)
class TvTrack:
    """9-channel tract-variable trajectory (see TV_CHANNELS for the order)."""

    frame_rate: float
    frames: np.ndarray  # (n, 9)
    normalized: bool = False

    def __post_init__(self):
        arr = np.asarray(self.frames, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != len(TV_CHANNELS):
            raise ShapeMismatch(f"TV frames must be (n, 9), got {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFinite("TV frames contain NaN or inf")
        if not (self.frame_rate > 0 and math.isfinite(self.frame_rate)):
            raise BadRate(f"frame rate must be positive, got {self.frame_rate}")
        if self.normalized and (np.abs(arr) > 1.0 + _TOL).any():
            raise ValidationError("normalized TVs must lie in [-1, 1]")
        object.__setattr__(self, "frames", arr)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    def to_feature_matrix(self) -> FeatureMatrix:
        return FeatureMatrix(self.frames, self.frame_rate)


@dataclass(frozen=True)
class SpeakerStats:
    """Per-channel (min, max) over a speaker's unnormalized TV data."""

    minima: np.ndarray  # (9,)
    maxima: np.ndarray  # (9,)

    def __post_init__(self):
        mn = np.asarray(self.minima, dtype=np.float64)
        mx = np.asarray(self.maxima, dtype=np.float64)
        if mn.shape != (len(TV_CHANNELS),) or mx.shape != (len(TV_CHANNELS),):
            raise ShapeMismatch("stats must cover the 9 TV channels")
        if not (np.isfinite(mn).all() and np.isfinite(mx).all()):
            raise NonFinite("stats contain NaN or inf")
        if (mx < mn).any():
            raise ValidationError("per-channel max below min")
        object.__setattr__(self, "minima", mn)
        object.__setattr__(self, "maxima", mx)

    def degenerate_channels(self) -> list[str]:
        """Channels where max == min (normalization would divide by zero)."""
        flat = self.maxima - self.minima == 0.0
        return [name for name, d in zip(TV_CHANNELS, flat) if d]


def fit_palate(tongue_points: np.ndarray, offset_mm: float = 0.0) -> PalateModel:
    """Upper envelope of the tongue point cloud, via the monotone-chain hull.

    Every input point lies on or below the returned polyline (within 1e-9).
    ``offset_mm`` shifts the polyline upward, compensating for the hull
    underestimating the palate.
    """
    pts = np.asarray(tongue_points, dtype=np.float64).reshape(-1, 2)
    if not np.isfinite(pts).all():
        raise NonFinite("tongue points contain NaN or inf")
    if pts.shape[0] < 2:
        raise DegenerateCloud("need at least 2 tongue points")
    # collapse duplicate x to the highest point; only that one can be on top
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = pts[order]
    keep = np.ones(len(pts), dtype=bool)
    keep[:-1] = np.diff(pts[:, 0]) != 0
    pts = pts[keep]
    if pts.shape[0] < 2:
        raise DegenerateCloud("all tongue points share one x coordinate")

    hull: list[np.ndarray] = []
    for p in pts:
        while len(hull) >= 2 and _cross(hull[-2], hull[-1], p) >= 0:
            hull.pop()
        hull.append(p)
    vertices = np.array(hull)
    vertices[:, 1] += offset_mm
    return PalateModel(vertices)


def _cross(o, a, b) -> float:
    return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])


def _points_to_polyline(pts: np.ndarray, palate: PalateModel) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized nearest-point query: (distances, x locations) for (n, 2) pts."""
    v = palate.vertices
    ax, ay = v[:-1, 0], v[:-1, 1]
    dx, dy = np.diff(v[:, 0]), np.diff(v[:, 1])
    px, py = pts[:, :1], pts[:, 1:]
    t = np.clip(((px - ax) * dx + (py - ay) * dy) / (dx * dx + dy * dy), 0.0, 1.0)
    nx, ny = ax + t * dx, ay + t * dy  # (n, n_segments)
    d = np.hypot(px - nx, py - ny)
    best = np.argmin(d, axis=1)  # first (leftmost) minimum on ties
    rows = np.arange(pts.shape[0])
    return d[rows, best], nx[rows, best]


def point_to_polyline(p, palate: PalateModel) -> tuple[float, float]:
    """(Euclidean distance, x of the nearest polyline point).

    The minimum is taken over all segments; among equal distances the point
    with the smallest x wins (segments are scanned left to right and only a
    strictly smaller distance replaces the incumbent).
    """
    d, loc = _points_to_polyline(np.asarray(p, dtype=np.float64).reshape(1, 2), palate)
    return float(d[0]), float(loc[0])


def derive_tvs(ema: EmaTrack, palate: PalateModel, lp_reference: float = 0.0) -> TvTrack:
    """Unnormalized tract variables, one frame per EMA frame.

    Per frame: LA = |UL - LL|, LP = ULx - lp_reference, JA = |UL - LI|, and
    (location, degree) of the nearest-palate point for tongue tip, body, and
    dorsum. Each output frame depends only on the same input frame; callers
    that want protrusion relative to the speaker's habitual lip position pass
    the speaker's mean ULx as ``lp_reference``.
    """
    f = ema.frames
    out = np.empty((ema.n_frames, len(TV_CHANNELS)))
    out[:, 0] = np.hypot(*(f[:, _UL] - f[:, _LL]).T)  # LA
    out[:, 1] = f[:, _UL.start] - lp_reference        # LP
    out[:, 2] = np.hypot(*(f[:, _UL] - f[:, _LI]).T)  # JA
    for k, cols in enumerate((_TT, _TB, _TD)):
        d, loc = _points_to_polyline(f[:, cols], palate)
        out[:, 3 + 2 * k] = loc
        out[:, 4 + 2 * k] = d
    return TvTrack(ema.frame_rate, out, normalized=False)


def compute_speaker_stats(tracks: list[TvTrack]) -> SpeakerStats:
    """Exact per-channel min/max over the concatenated unnormalized tracks."""
    if not tracks or sum(t.n_frames for t in tracks) == 0:
        raise EmptyInput("no TV frames to compute stats over")
    if any(t.normalized for t in tracks):
        raise ValidationError("speaker stats are defined over unnormalized TVs")
    stacked = np.vstack([t.frames for t in tracks])
    return SpeakerStats(stacked.min(axis=0), stacked.max(axis=0))


def normalize_tvs(track: TvTrack, stats: SpeakerStats) -> TvTrack:
    """Map each channel affinely so [min, max] -> [-1, 1], clamping outside.

    Clamping handles unseen-speaker stats; for in-range values
    ``denormalize_tvs(normalize_tvs(v))`` returns v within 1e-9.
    """
    span = stats.maxima - stats.minima
    if (span == 0.0).any():
        raise ConstantChannel(f"degenerate channels: {stats.degenerate_channels()}")
    scaled = 2.0 * (track.frames - stats.minima) / span - 1.0
    return TvTrack(track.frame_rate, np.clip(scaled, -1.0, 1.0), normalized=True)


def denormalize_tvs(track: TvTrack, stats: SpeakerStats) -> TvTrack:
    span = stats.maxima - stats.minima
    if (span == 0.0).any():
        raise ConstantChannel(f"degenerate channels: {stats.degenerate_channels()}")
    raw = (track.frames + 1.0) / 2.0 * span + stats.minima
    return TvTrack(track.frame_rate, raw, normalized=False)


# --- file formats -------------------------------------------------------------

def write_ema_csv(path, track: EmaTrack) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("time," + ",".join(EMA_CHANNELS) + "\n")
        for i, row in enumerate(track.frames):
            t = i / track.frame_rate
            f.write(f"{t!r}," + ",".join(repr(float(v)) for v in row) + "\n")


def read_ema_csv(path) -> EmaTrack:
    """Parse an EMA CSV; the frame rate is recovered from the time column,
    which must be uniform and strictly increasing."""
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        if header != "time," + ",".join(EMA_CHANNELS):
            raise ValidationError(f"{path}: unexpected EMA CSV header")
        rows = []
        for lineno, line in enumerate(f, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(",")
            if len(parts) != 13:
                raise ValidationError(f"{path}:{lineno}: expected 13 columns")
            try:
                rows.append([float(p) for p in parts])
            except ValueError:
                raise ValidationError(f"{path}:{lineno}: non-numeric value") from None
    if len(rows) < 2:
        raise ValidationError(f"{path}: need at least 2 frames to recover the rate")
    arr = np.array(rows)
    times, frames = arr[:, 0], arr[:, 1:]
    dt = np.diff(times)
    if (dt <= 0).any():
        raise ValidationError(f"{path}: time column must be strictly increasing")
    if not np.allclose(dt, dt[0], rtol=1e-6, atol=1e-9):
        raise ValidationError(f"{path}: time column is not uniformly spaced")
    return EmaTrack(1.0 / dt[0], frames)


def write_palate_csv(path, palate: PalateModel) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("x,y\n")
        for x, y in palate.vertices:
            f.write(f"{float(x)!r},{float(y)!r}\n")


def read_palate_csv(path) -> PalateModel:
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        if header != "x,y":
            raise ValidationError(f"{path}: expected 'x,y' header")
        verts = []
        for lineno, line in enumerate(f, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split(",")
            if len(parts) != 2:
                raise ValidationError(f"{path}:{lineno}: expected 2 columns")
            verts.append((float(parts[0]), float(parts[1])))
    return PalateModel(np.array(verts))


def write_stats_tsv(path, stats: SpeakerStats) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("channel\tmin\tmax\n")
        for name, mn, mx in zip(TV_CHANNELS, stats.minima, stats.maxima):
            f.write(f"{name}\t{float(mn)!r}\t{float(mx)!r}\n")


def read_stats_tsv(path) -> SpeakerStats:
    mins, maxs = [], []
    with open(path, encoding="utf-8") as f:
        header = f.readline().rstrip("\n")
        if header != "channel\tmin\tmax":
            raise ValidationError(f"{path}: unexpected stats header")
        for lineno, line in enumerate(f, start=2):
            if not line.strip():
                continue
            parts = line.rstrip("\n").split("\t")
            if len(parts) != 3 or parts[0] != TV_CHANNELS[len(mins)]:
                raise ValidationError(f"{path}:{lineno}: malformed stats row")
            mins.append(float(parts[1]))
            maxs.append(float(parts[2]))
    if len(mins) != len(TV_CHANNELS):
        raise ValidationError(f"{path}: expected {len(TV_CHANNELS)} rows")
    return SpeakerStats(np.array(mins), np.array(maxs))
