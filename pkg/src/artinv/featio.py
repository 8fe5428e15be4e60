"""Feature ingestion and interchange.

Houses the generic frame-rate-tagged feature matrix, the 41-class phoneme
inventory with its 18-dimensional articulatory coding, phoneme alignments,
linear resampling, and the AFM1 binary interchange format.

File formats
------------
AFM1 (little-endian):
    magic ``AFM1`` (4 bytes), u32 version = 1, u32 n_frames, u32 n_dims,
    f64 frame_rate_hz, then n_frames * n_dims float32 values, row-major.
    Values are stored in float32 to bound file size; in-memory computation
    stays in float64.

Alignment TSV (UTF-8, ``.`` decimal):
    one interval per line, ``start<TAB>end<TAB>label``, sorted, non-overlapping.

Inventory TSV:
    comment lines start with ``#``; rows are ``label<TAB>class_id<TAB>slots``
    where ``slots`` is a comma-separated list of indices into the 18
    articulatory slots (empty for silence).
"""

from __future__ import annotations

import importlib.resources
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AlignmentError,
    BadInterval,
    BadLabel,
    BadMagic,
    BadRate,
    NonFinite,
    Overlap,
    ShapeMismatch,
    Truncated,
    UnknownPhoneme,
    Unsorted,
)

N_PHONEME_CLASSES = 41
N_PM_SLOTS = 18

_AFM_MAGIC = b"AFM1"
_AFM_VERSION = 1
_AFM_HEADER = struct.Struct("<4sIIId")


@dataclass(frozen=True)
class FeatureMatrix:
    """(n_frames, n_dims) real matrix with a frame rate.

    ``frame_rate == 0`` marks rate-free vectors (speaker embeddings).
    """

    data: np.ndarray
    frame_rate: float

    def __post_init__(self):
        arr = np.asarray(self.data, dtype=np.float64)
        if arr.ndim != 2:
            raise ShapeMismatch(f"feature matrix must be 2-D, got shape {arr.shape}")
        if not np.isfinite(arr).all():
            raise NonFinite("feature matrix contains NaN or inf")
        if not (self.frame_rate >= 0 and math.isfinite(self.frame_rate)):
            raise BadRate(f"frame rate must be finite and >= 0, got {self.frame_rate}")
        object.__setattr__(self, "data", arr)

    @property
    def n_frames(self) -> int:
        return self.data.shape[0]

    @property
    def n_dims(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class PhonemeAlignment:
    """Ordered, non-overlapping labeled time intervals for one utterance."""

    intervals: tuple[tuple[float, float, str], ...]

    def __post_init__(self):
        inv = inventory()
        prev_start, prev_end = -math.inf, -math.inf
        for start, end, label in self.intervals:
            if not (math.isfinite(start) and math.isfinite(end) and start < end):
                raise BadInterval(f"bad interval [{start}, {end})")
            if label not in inv.class_id_of:
                raise BadLabel(f"label {label!r} not in inventory")
            if start < prev_start:
                raise Unsorted(f"interval at {start} starts before previous {prev_start}")
            if start < prev_end:
                raise Overlap(f"interval at {start} overlaps previous ending {prev_end}")
            prev_start, prev_end = start, end

    def __len__(self) -> int:
        return len(self.intervals)


class PhonemeInventory:
    """41-class label set with stable ids and the 18-slot articulatory coding."""

    def __init__(self, labels: list[str], slot_table: dict[str, tuple[int, ...]]):
        if len(labels) != N_PHONEME_CLASSES:
            raise BadLabel(f"inventory must have {N_PHONEME_CLASSES} classes, got {len(labels)}")
        if len(set(labels)) != len(labels):
            raise BadLabel("duplicate labels in inventory")
        self.labels = tuple(labels)
        self.class_id_of = {lab: i for i, lab in enumerate(labels)}
        self.slots_of = dict(slot_table)
        vectors = np.zeros((N_PHONEME_CLASSES, N_PM_SLOTS))
        for lab, slots in slot_table.items():
            if lab not in self.class_id_of:
                raise BadLabel(f"slot table label {lab!r} not in inventory")
            for s in slots:
                if not 0 <= s < N_PM_SLOTS:
                    raise BadLabel(f"slot index {s} out of range for {lab!r}")
            if lab != "sil" and len(slots) == 0:
                raise BadLabel(f"non-silence label {lab!r} maps to no slot")
            if len(slots) > 2:
                raise BadLabel(f"label {lab!r} sets {len(slots)} slots (max 2)")
            vectors[self.class_id_of[lab], list(slots)] = 1.0
        if self.slots_of.get("sil"):
            raise BadLabel("'sil' must map to the zero vector")
        self.pm_vectors = vectors
        self.pm_vectors.setflags(write=False)


def load_inventory_tsv(lines) -> PhonemeInventory:
    """Parse inventory rows (see module docstring for the format)."""
    rows = []
    for raw in lines:
        line = raw.rstrip("\n")
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) == 2:  # trailing empty slot column may be stripped
            parts.append("")
        if len(parts) != 3:
            raise BadLabel(f"malformed inventory row: {line!r}")
        label, cid_s, slots_s = parts
        try:
            cid = int(cid_s)
        except ValueError:
            raise BadLabel(f"bad class id in row: {line!r}") from None
        slots = tuple(int(s) for s in slots_s.split(",")) if slots_s else ()
        rows.append((cid, label, slots))
    rows.sort()
    if [cid for cid, _, _ in rows] != list(range(len(rows))):
        raise BadLabel("class ids must be a contiguous 0-based range")
    labels = [lab for _, lab, _ in rows]
    return PhonemeInventory(labels, {lab: slots for _, lab, slots in rows})


_INVENTORY: PhonemeInventory | None = None

# The 15 vowel labels; glides W/Y share vowel slots but are not vowels.
VOWELS = frozenset(
    "AA AE AH AO AW AY EH ER EY IH IY OW OY UH UW".split()
)


def inventory() -> PhonemeInventory:
    """The packaged inventory table, loaded once."""
    global _INVENTORY
    if _INVENTORY is None:
        ref = importlib.resources.files("artinv.data").joinpath("phoneme_inventory.tsv")
        _INVENTORY = load_inventory_tsv(ref.read_text(encoding="utf-8").splitlines())
    return _INVENTORY


def phoneme_class_id(label: str) -> int:
    inv = inventory()
    try:
        return inv.class_id_of[label]
    except KeyError:
        raise UnknownPhoneme(f"{label!r} not in inventory") from None


def phoneme_label(class_id: int) -> str:
    inv = inventory()
    if not 0 <= class_id < N_PHONEME_CLASSES:
        raise UnknownPhoneme(f"class id {class_id} out of range")
    return inv.labels[class_id]


def encode_phoneme_pm(label: str) -> np.ndarray:
    """18-dim binary articulatory vector for ``label`` (zeros for silence)."""
    return inventory().pm_vectors[phoneme_class_id(label)].copy()


def frame_labels(align: PhonemeAlignment, rate: float, n_frames: int) -> np.ndarray:
    """Per-frame class ids; frame i is labeled by the interval containing its
    center time (i + 0.5) / rate, "sil" when uncovered."""
    if rate <= 0:
        raise BadRate(f"rate must be positive, got {rate}")
    sil = phoneme_class_id("sil")
    out = np.full(n_frames, sil, dtype=np.int64)
    if not align.intervals:
        return out
    starts = np.array([iv[0] for iv in align.intervals])
    ends = np.array([iv[1] for iv in align.intervals])
    ids = np.array([phoneme_class_id(iv[2]) for iv in align.intervals])
    t = (np.arange(n_frames) + 0.5) / rate
    # index of last interval with start <= t; valid when t < its end
    idx = np.searchsorted(starts, t, side="right") - 1
    valid = (idx >= 0) & (t < ends[np.clip(idx, 0, len(ends) - 1)])
    out[valid] = ids[idx[valid]]
    return out


def resample_linear(m: FeatureMatrix, dst_rate: float) -> FeatureMatrix:
    """Per-dimension linear resampling to ``dst_rate``.

    Output length is round((n_in - 1) * dst / src) + 1, so both endpoints are
    sampled exactly; output frame i reads source position
    i * (n_in - 1) / (n_out - 1). A single-frame input is passed through.
    Resampling to the source rate is the bitwise identity.
    """
    if dst_rate <= 0 or not math.isfinite(dst_rate):
        raise BadRate(f"destination rate must be positive, got {dst_rate}")
    if m.frame_rate <= 0:
        raise BadRate("source matrix has no frame rate")
    n_in = m.n_frames
    if n_in < 1:
        raise ShapeMismatch("cannot resample an empty matrix")
    # round half up, not banker's, so lengths are platform-stable
    n_out = int(math.floor((n_in - 1) * dst_rate / m.frame_rate + 0.5)) + 1
    if n_in == 1 or n_out == 1:
        return FeatureMatrix(np.repeat(m.data[:1], n_out, axis=0), dst_rate)
    pos = np.arange(n_out) * (n_in - 1) / (n_out - 1)
    lo = np.clip(np.floor(pos).astype(int), 0, n_in - 2)
    w = (pos - lo)[:, None]
    out = (1.0 - w) * m.data[lo] + w * m.data[lo + 1]
    return FeatureMatrix(out, dst_rate)


def concat_speaker_embedding(m: FeatureMatrix, emb: FeatureMatrix) -> FeatureMatrix:
    """Append a single-frame embedding to every frame of ``m``."""
    if emb.n_frames != 1:
        raise ShapeMismatch(f"embedding must have exactly 1 frame, got {emb.n_frames}")
    tiled = np.repeat(emb.data, m.n_frames, axis=0)
    return FeatureMatrix(np.hstack([m.data, tiled]), m.frame_rate)


# --- AFM1 binary format -------------------------------------------------------

def write_afm(path, m: FeatureMatrix) -> None:
    with np.errstate(over="ignore"):
        payload = m.data.astype(np.float32)
    if not np.isfinite(payload).all():
        raise NonFinite("matrix is not float32-finite; refusing to write")
    header = _AFM_HEADER.pack(_AFM_MAGIC, _AFM_VERSION, m.n_frames, m.n_dims, m.frame_rate)
    with open(path, "wb") as f:
        f.write(header)
        f.write(payload.astype("<f4").tobytes(order="C"))


def read_afm(path) -> FeatureMatrix:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < _AFM_HEADER.size:
        raise Truncated(f"{path}: shorter than the AFM1 header")
    magic, version, n_frames, n_dims, rate = _AFM_HEADER.unpack_from(raw)
    if magic != _AFM_MAGIC or version != _AFM_VERSION:
        raise BadMagic(f"{path}: not an AFM1 v{_AFM_VERSION} file")
    expected = _AFM_HEADER.size + 4 * n_frames * n_dims
    if len(raw) < expected:
        raise Truncated(f"{path}: expected {expected} bytes, found {len(raw)}")
    data = np.frombuffer(raw, dtype="<f4", count=n_frames * n_dims, offset=_AFM_HEADER.size)
    data = data.astype(np.float64).reshape(n_frames, n_dims)
    if not np.isfinite(data).all():
        raise NonFinite(f"{path}: payload contains NaN or inf")
    return FeatureMatrix(data, rate)


# --- alignment TSV ------------------------------------------------------------

def read_alignment_tsv(path) -> PhonemeAlignment:
    intervals = []
    with open(path, encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise BadLabel(f"{path}:{lineno}: expected start<TAB>end<TAB>label")
            try:
                start, end = float(parts[0]), float(parts[1])
            except ValueError:
                raise BadLabel(f"{path}:{lineno}: non-numeric interval bounds") from None
            intervals.append((start, end, parts[2]))
    return PhonemeAlignment(tuple(intervals))


def write_alignment_tsv(path, align: PhonemeAlignment) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for start, end, label in align.intervals:
            f.write(f"{float(start)!r}\t{float(end)!r}\t{label}\n")
