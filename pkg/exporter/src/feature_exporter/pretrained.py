"""Pretrained-network backends for the ssl and spk-emb kinds.

Both loaders accept a local model directory first and fall back to the
public hub identifier; any failure (missing packages, unreachable hub,
absent files) surfaces as ModelLoadError so the batch job can record it and
move on.
"""

from __future__ import annotations

from functools import lru_cache
from pathlib import Path

import numpy as np

from .audio import TARGET_RATE
from .errors import ModelLoadError

SSL_DIM = 1024
SSL_RATE = 50.0
SSL_HUB_ID = "facebook/hubert-large-ll60k"
SPK_DIM = 192
SPK_WEIGHTS_NAME = "spk_embedder.pt"


@lru_cache(maxsize=2)
def _load_ssl(model_dir: str | None):
    try:
        import torch
        from transformers import HubertModel
    except ImportError as exc:
        raise ModelLoadError(f"torch/transformers unavailable: {exc}") from exc
    source = model_dir or SSL_HUB_ID
    try:
        model = HubertModel.from_pretrained(source)
    except Exception as exc:  # hub unreachable, bad dir, ...
        raise ModelLoadError(f"cannot load SSL model from {source!r}: {exc}") from exc
    if model.config.hidden_size != SSL_DIM:
        raise ModelLoadError(
            f"SSL model at {source!r} has hidden size {model.config.hidden_size}, "
            f"contract requires {SSL_DIM}")
    model.eval()
    return torch, model


def extract_ssl(samples: np.ndarray, model_dir: str | None = None
                ) -> tuple[np.ndarray, float]:
    """(T, 1024) final-layer features at 50 Hz for 16 kHz mono input."""
    torch, model = _load_ssl(model_dir)
    with torch.no_grad():
        x = torch.from_numpy(samples).to(torch.float32).unsqueeze(0)
        out = model(x).last_hidden_state[0].numpy().astype(np.float64)
    return out, SSL_RATE


def build_spk_embedder(torch_module=None):
    """Compact TDNN with attentive statistics pooling -> 192-dim embedding.

    The architecture is fixed; weights come from ``spk_embedder.pt`` in the
    model directory (a plain state dict).
    """
    try:
        import torch
        from torch import nn
    except ImportError as exc:
        raise ModelLoadError(f"torch unavailable: {exc}") from exc

    class SpkEmbedder(nn.Module):
        def __init__(self):
            super().__init__()
            self.frontend = nn.Sequential(
                nn.Conv1d(40, 128, 5, dilation=1, padding=2), nn.ReLU(),
                nn.Conv1d(128, 128, 3, dilation=2, padding=2), nn.ReLU(),
                nn.Conv1d(128, 128, 3, dilation=3, padding=3), nn.ReLU(),
                nn.Conv1d(128, 192, 1), nn.ReLU(),
            )
            self.attention = nn.Conv1d(192, 192, 1)
            self.proj = nn.Linear(2 * 192, SPK_DIM)

        def forward(self, feats):  # (B, 40, T)
            h = self.frontend(feats)
            w = torch.softmax(self.attention(h), dim=2)
            mu = (h * w).sum(dim=2)
            var = (h * h * w).sum(dim=2) - mu * mu
            return self.proj(torch.cat([mu, var.clamp_min(1e-8).sqrt()], dim=1))

    return SpkEmbedder()


@lru_cache(maxsize=2)
def _load_spk(model_dir: str | None):
    if model_dir is None:
        raise ModelLoadError(
            "speaker embedder needs --model-dir with spk_embedder.pt "
            "(no public hub fallback is configured)")
    try:
        import torch
    except ImportError as exc:
        raise ModelLoadError(f"torch unavailable: {exc}") from exc
    weights = Path(model_dir) / SPK_WEIGHTS_NAME
    if not weights.exists():
        raise ModelLoadError(f"{weights} not found")
    model = build_spk_embedder()
    try:
        model.load_state_dict(torch.load(weights, map_location="cpu", weights_only=True))
    except Exception as exc:
        raise ModelLoadError(f"cannot load {weights}: {exc}") from exc
    model.eval()
    return torch, model


def extract_spk_embedding(samples: np.ndarray, model_dir: str | None = None
                          ) -> tuple[np.ndarray, float]:
    """(1, 192) utterance-level embedding; frame rate 0 marks it rate-free."""
    from .dsp import log_mel_spectrogram

    torch, model = _load_spk(model_dir)
    logmel = log_mel_spectrogram(samples, frame_len=400, hop=160,
                                 n_fft=512, n_filters=40)
    with torch.no_grad():
        x = torch.from_numpy(logmel.T).to(torch.float32).unsqueeze(0)
        emb = model(x)[0].numpy().astype(np.float64)
    return emb.reshape(1, SPK_DIM), 0.0
