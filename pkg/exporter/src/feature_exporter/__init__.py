"""Batch exporter of acoustic features into the AFM1 interchange format.

Feature kinds and their contracts:
    ssl      (T, 1024) at 50 Hz   final-layer features of a pretrained
                                  speech transformer (HuBERT-large layout)
    spk-emb  (1, 192)  rate 0     utterance-level speaker embedding
    mfcc     (T, 39)   at 100 Hz  13 MFCCs + deltas + delta-deltas,
                                  per-utterance mean/variance normalized
    mcep     (T, 25)   at 200 Hz  mel-cepstra for distortion scoring

MFCC and mcep are self-contained DSP. The ssl and spk-emb kinds load
pretrained networks (from a local directory, or a model hub when reachable);
when no model can be loaded the per-file manifest records ModelLoadError and
the job continues.
"""

from .export import ExportJob, ManifestRow, export
from .errors import AudioDecodeError, ExporterError, ModelLoadError, UnknownKind

__all__ = ["ExportJob", "ManifestRow", "export", "AudioDecodeError",
           "ExporterError", "ModelLoadError", "UnknownKind"]

__version__ = "0.1.0"
