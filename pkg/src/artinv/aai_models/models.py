"""Model architectures.

Baseline: two-layer bidirectional GRU (hidden 256) into a two-layer MLP
(hidden 128); dropout 0.3 after every layer, batch norm before the output
layer; 50 outputs = 9 tract variables (tanh) + 41 phoneme logits; trained
with MAE on the TVs plus 0.5 x cross-entropy on the phonemes.

Proposed: same trunk, but the utterance is processed in consecutive chunks;
each chunk's input frames carry an MLP encoding of the previous chunk's TV
output (a learned start vector for the first chunk), and the phoneme head
regresses the 18-dim articulatory-slot vectors (sigmoid) instead of logits.
A strided 1-D CNN discriminator scores TV sequences for adversarial training.

Decoder: mirrors the baseline trunk, mapping normalized TVs (plus an optional
speaker embedding repeated per frame) back to acoustic feature frames.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatch, TooShort
from ..diffcore import (
    BatchNorm1d,
    BiGRU,
    Conv1d,
    Linear,
    MLP,
    Module,
    Parameter,
    Tensor,
    concat,
    dropout,
    leaky_relu,
    mae_loss,
    cross_entropy,
    relu,
    sigmoid,
    tanh,
)
from ..diffcore.tensor import square, tmean


@dataclass
class BaselineConfig:
    input_dim: int
    gru_hidden: int = 256
    gru_layers: int = 2
    mlp_hidden: int = 128
    dropout: float = 0.3
    out_tv: int = 9
    out_phoneme: int = 41
    ce_weight: float = 0.5

    def __post_init__(self):
        if min(self.input_dim, self.gru_hidden, self.gru_layers, self.mlp_hidden,
               self.out_tv, self.out_phoneme) <= 0:
            raise ShapeMismatch("all baseline dimensions must be positive")


@dataclass
class DiscConfig:
    channels: tuple[int, ...] = (16, 32, 64, 64)
    kernel: int = 5
    stride: int = 2
    leak: float = 0.1


@dataclass
class ProposedConfig:
    input_dim: int
    gru_hidden: int = 256
    gru_layers: int = 2
    mlp_hidden: int = 128
    dropout: float = 0.3
    out_tv: int = 9
    pm_dim: int = 18
    chunk_len: int = 50
    ar_hidden: int = 64
    ar_dim: int = 32
    pm_weight: float = 0.5
    adv_weight: float = 1.0
    feature_matching: bool = False
    disc: DiscConfig = field(default_factory=DiscConfig)

    def __post_init__(self):
        if self.chunk_len < 1:
            raise ShapeMismatch("chunk_len must be >= 1")
        if min(self.input_dim, self.gru_hidden, self.gru_layers, self.mlp_hidden,
               self.ar_hidden, self.ar_dim, self.out_tv, self.pm_dim) <= 0:
            raise ShapeMismatch("all proposed-model dimensions must be positive")


@dataclass
class DecoderConfig:
    input_dim: int   # 9 TVs + speaker-embedding dims
    out_dim: int     # acoustic feature dims
    gru_hidden: int = 256
    gru_layers: int = 2
    mlp_hidden: int = 128
    dropout: float = 0.3

    def __post_init__(self):
        if min(self.input_dim, self.out_dim, self.gru_hidden, self.gru_layers,
               self.mlp_hidden) <= 0:
            raise ShapeMismatch("all decoder dimensions must be positive")


class _Trunk(Module):
    """BiGRU stack -> hidden affine -> batch norm -> output affine, with
    dropout after every layer as in the baseline recipe."""

    def __init__(self, in_dim, gru_hidden, gru_layers, mlp_hidden, out_dim, p_drop, rng):
        self.gru = BiGRU(in_dim, gru_hidden, gru_layers, rng)
        self.hidden_fc = Linear(self.gru.out_dim, mlp_hidden, rng)
        self.bn = BatchNorm1d(mlp_hidden)
        self.out_fc = Linear(mlp_hidden, out_dim, rng)
        self.p_drop = p_drop

    def __call__(self, x: Tensor, training: bool, rng) -> Tensor:
        def drop(t):
            return dropout(t, self.p_drop, training, rng)

        h = self.gru(x, between=drop)
        h = drop(relu(self.hidden_fc(h)))
        h = self.bn(h, training)
        return self.out_fc(h)


class BaselineModel(Module):
    def __init__(self, cfg: BaselineConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.trunk = _Trunk(cfg.input_dim, cfg.gru_hidden, cfg.gru_layers,
                            cfg.mlp_hidden, cfg.out_tv + cfg.out_phoneme,
                            cfg.dropout, rng)

    def forward(self, features: np.ndarray, training: bool = False,
                rng: np.random.Generator | None = None) -> tuple[Tensor, Tensor]:
        """(tanh TV predictions (T, 9), phoneme logits (T, 41))."""
        feats = np.asarray(features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[1] != self.cfg.input_dim:
            raise ShapeMismatch(f"expected (T, {self.cfg.input_dim}), got {feats.shape}")
        y = self.trunk(Tensor(feats), training, rng)
        tv = tanh(y[:, : self.cfg.out_tv])
        logits = y[:, self.cfg.out_tv:]
        return tv, logits


def baseline_loss(tv_pred: Tensor, tv_true: np.ndarray, logits: Tensor,
                  labels: np.ndarray, ce_weight: float = 0.5) -> Tensor:
    return mae_loss(tv_pred, tv_true) + ce_weight * cross_entropy(logits, labels)


class ProposedModel(Module):
    def __init__(self, cfg: ProposedConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.trunk = _Trunk(cfg.input_dim + cfg.ar_dim, cfg.gru_hidden,
                            cfg.gru_layers, cfg.mlp_hidden,
                            cfg.out_tv + cfg.pm_dim, cfg.dropout, rng)
        self.ar_encoder = MLP([cfg.chunk_len * cfg.out_tv, cfg.ar_hidden, cfg.ar_dim], rng)
        self.start_vec = Parameter(np.zeros((1, cfg.ar_dim)))

    def forward(self, features: np.ndarray, teacher_tv: np.ndarray | None = None,
                training: bool = False, rng: np.random.Generator | None = None
                ) -> tuple[Tensor, Tensor]:
        """(tanh TV predictions (T, 9), sigmoid slot predictions (T, 18)).

        Chunks are processed independently; the conditioning vector for chunk
        c encodes chunk c-1's TVs (``teacher_tv`` slice when given, otherwise
        the model's own prediction, cut from the graph). The first chunk uses
        the learned start vector.
        """
        cfg = self.cfg
        feats = np.asarray(features, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[1] != cfg.input_dim:
            raise ShapeMismatch(f"expected (T, {cfg.input_dim}), got {feats.shape}")
        if teacher_tv is not None:
            teacher_tv = np.asarray(teacher_tv, dtype=np.float64)
            if teacher_tv.shape != (feats.shape[0], cfg.out_tv):
                raise ShapeMismatch("teacher TVs must align with the input frames")
        T = feats.shape[0]
        tv_chunks, pm_chunks = [], []
        enc = self.start_vec
        prev_tv_pred: Tensor | None = None
        for lo in range(0, T, cfg.chunk_len):
            hi = min(lo + cfg.chunk_len, T)
            if lo > 0:
                if teacher_tv is not None:
                    prev = Tensor(teacher_tv[lo - cfg.chunk_len: lo].reshape(1, -1))
                else:
                    prev = Tensor(prev_tv_pred.data.reshape(1, -1))
                enc = self.ar_encoder(prev)
            tiled = Tensor(np.zeros((hi - lo, cfg.ar_dim))) + enc
            x = concat([Tensor(feats[lo:hi]), tiled], axis=1)
            y = self.trunk(x, training, rng)
            tv_c = tanh(y[:, : cfg.out_tv])
            pm_c = sigmoid(y[:, cfg.out_tv:])
            tv_chunks.append(tv_c)
            pm_chunks.append(pm_c)
            prev_tv_pred = tv_c
        return concat(tv_chunks, axis=0), concat(pm_chunks, axis=0)


def proposed_loss(tv_pred: Tensor, tv_true: np.ndarray, pm_pred: Tensor,
                  pm_true: np.ndarray, d_fake: Tensor | None = None,
                  pm_weight: float = 0.5, adv_weight: float = 1.0) -> Tensor:
    loss = mae_loss(tv_pred, tv_true) + pm_weight * mae_loss(pm_pred, pm_true)
    if d_fake is not None and adv_weight != 0.0:
        loss = loss + adv_weight * tmean(square(d_fake - 1.0))
    return loss


class Discriminator(Module):
    """Strided 1-D CNN over 9-channel TV sequences; one realism score per
    remaining output frame."""

    def __init__(self, cfg: DiscConfig, rng: np.random.Generator, in_channels: int = 9):
        self.cfg = cfg
        self.convs = []
        c = in_channels
        for out_c in cfg.channels:
            self.convs.append(Conv1d(c, out_c, cfg.kernel, cfg.stride, rng))
            c = out_c
        self.proj = Linear(c, 1, rng)

    @property
    def receptive_field(self) -> int:
        rf, jump = 1, 1
        for conv in self.convs:
            rf += (conv.kernel - 1) * jump
            jump *= conv.stride
        return rf

    def out_len(self, t: int) -> int:
        for conv in self.convs:
            t = conv.out_len(t)
        return t

    def forward(self, tv_seq: Tensor, return_features: bool = False):
        if tv_seq.data.shape[0] < self.receptive_field:
            raise TooShort(
                f"sequence of {tv_seq.data.shape[0]} frames is shorter than the "
                f"discriminator receptive field {self.receptive_field}")
        feats = []
        h = tv_seq
        for conv in self.convs:
            h = leaky_relu(conv(h), self.cfg.leak)
            feats.append(h)
        scores = self.proj(h)
        return (scores, feats) if return_features else scores


class DecoderModel(Module):
    def __init__(self, cfg: DecoderConfig, rng: np.random.Generator):
        self.cfg = cfg
        self.trunk = _Trunk(cfg.input_dim, cfg.gru_hidden, cfg.gru_layers,
                            cfg.mlp_hidden, cfg.out_dim, cfg.dropout, rng)

    def forward(self, tv_plus_emb: np.ndarray, training: bool = False,
                rng: np.random.Generator | None = None) -> Tensor:
        """Acoustic feature frames, one per input frame."""
        feats = np.asarray(tv_plus_emb, dtype=np.float64)
        if feats.ndim != 2 or feats.shape[1] != self.cfg.input_dim:
            raise ShapeMismatch(f"expected (T, {self.cfg.input_dim}), got {feats.shape}")
        return self.trunk(Tensor(feats), training, rng)
