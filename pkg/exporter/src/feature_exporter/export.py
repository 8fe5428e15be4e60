"""Batch export: per-file feature extraction with a failure manifest.

Every input appears in the manifest exactly once with status ``ok`` or the
failure class name; output files are written atomically (temp + rename) so a
crashed job never leaves half-written AFMs behind.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from pathlib import Path

from . import dsp
from .audio import list_audio_files, read_wav_16k
from .errors import AudioDecodeError, ExporterError, ModelLoadError, UnknownKind

KINDS = ("ssl", "spk-emb", "mfcc", "mcep")

# kind -> (n_dims, frame_rate) contract
CONTRACTS = {
    "ssl": (1024, 50.0),
    "spk-emb": (192, 0.0),
    "mfcc": (39, 100.0),
    "mcep": (25, 200.0),
}


@dataclass
class ExportJob:
    audio_paths: list[Path]
    kind: str
    out_dir: Path
    model_dir: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UnknownKind(f"kind must be one of {KINDS}, got {self.kind!r}")
        self.audio_paths = [Path(p) for p in self.audio_paths]
        self.out_dir = Path(self.out_dir)


@dataclass
class ManifestRow:
    path: str
    status: str  # "ok" or an error class name
    frames: int


def _extract(kind: str, samples, model_dir):
    if kind == "mfcc":
        return dsp.mfcc_39(samples)
    if kind == "mcep":
        return dsp.mcep_25(samples)
    from . import pretrained

    if kind == "ssl":
        return pretrained.extract_ssl(samples, model_dir)
    return pretrained.extract_spk_embedding(samples, model_dir)


def _write_atomic(path: Path, data, rate: float) -> None:
    from .afm import write_afm

    tmp = path.with_suffix(path.suffix + ".tmp")
    write_afm(tmp, data, rate)
    os.replace(tmp, path)


def export(job: ExportJob) -> list[ManifestRow]:
    """Run the job; returns the manifest (also written to the output dir)."""
    job.out_dir.mkdir(parents=True, exist_ok=True)
    want_dim, want_rate = CONTRACTS[job.kind]
    rows: list[ManifestRow] = []
    for audio in job.audio_paths:
        try:
            samples = read_wav_16k(audio)
            data, rate = _extract(job.kind, samples, job.model_dir)
            if data.shape[1] != want_dim or rate != want_rate:
                raise ExporterError(
                    f"extractor returned {data.shape} at {rate} Hz, contract is "
                    f"(*, {want_dim}) at {want_rate} Hz")
            _write_atomic(job.out_dir / f"{audio.stem}.{job.kind}.afm", data, rate)
            rows.append(ManifestRow(str(audio), "ok", data.shape[0]))
        except (AudioDecodeError, ModelLoadError, ExporterError) as exc:
            rows.append(ManifestRow(str(audio), type(exc).__name__, 0))
    _write_manifest(job.out_dir / "manifest.tsv", rows)
    return rows


def _write_manifest(path: Path, rows: list[ManifestRow]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write("path\tstatus\tframes\n")
        for r in rows:
            f.write(f"{r.path}\t{r.status}\t{r.frames}\n")


def job_from_dir(audio_dir, kind: str, out_dir, model_dir=None) -> ExportJob:
    return ExportJob(list_audio_files(audio_dir), kind, Path(out_dir), model_dir)
