"""Training loop: one utterance per step, alternating generator/discriminator
updates for the adversarial model, early stopping on validation TV-MAE.

Single-threaded and bitwise deterministic for a fixed seed: utterance order,
dropout masks, and initialization all flow from one Generator.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import NonFinite, ShapeMismatch, TooShort
from ..diffcore import Tensor, adam_step, clip_global_norm, lsgan_losses, mae_loss, zero_grad
from ..diffcore.tensor import square, tmean
from .. import evalsuite
from .models import BaselineModel, DecoderModel, Discriminator, ProposedModel, baseline_loss


@dataclass
class Sample:
    """One utterance: inputs plus whichever targets the model kind needs."""

    name: str
    features: np.ndarray                 # (T, F) model input
    tv: np.ndarray | None = None         # (T, 9) normalized TV targets
    labels: np.ndarray | None = None     # (T,) phoneme class ids (baseline)
    pm: np.ndarray | None = None         # (T, 18) slot targets (proposed)
    target: np.ndarray | None = None     # (T, D) acoustic targets (decoder)


@dataclass
class TrainConfig:
    epochs: int = 30
    lr: float = 1e-4
    beta1: float = 0.9
    beta2: float = 0.999
    adam_eps: float = 1e-8
    clip_norm: float = 1.0
    patience: int = 10
    seed: int = 0
    teacher_forcing: bool = True


@dataclass
class TrainResult:
    log_rows: list[dict] = field(default_factory=list)
    best_epoch: int = -1
    best_val_mae: float = float("inf")
    stopped_early: bool = False

    LOG_COLUMNS = ("epoch", "train_loss", "d_loss", "g_adv", "val_mae", "val_pcc")

    def write_log_tsv(self, path) -> None:
        with open(path, "w", encoding="utf-8") as f:
            f.write("\t".join(self.LOG_COLUMNS) + "\n")
            for row in self.log_rows:
                f.write("\t".join(repr(row[c]) for c in self.LOG_COLUMNS) + "\n")


def split_train_val(samples: list[Sample], val_fraction: float,
                    rng: np.random.Generator) -> tuple[list[Sample], list[Sample]]:
    """Random split; at least one utterance lands in each side when possible."""
    if not samples:
        raise ShapeMismatch("no samples to split")
    order = rng.permutation(len(samples))
    n_val = int(round(val_fraction * len(samples)))
    n_val = max(1, min(n_val, len(samples) - 1)) if len(samples) > 1 else 0
    val_idx = set(order[:n_val].tolist())
    train = [s for i, s in enumerate(samples) if i not in val_idx]
    val = [s for i, s in enumerate(samples) if i in val_idx]
    return train, val


def _check_finite(loss_value: float, context: str) -> None:
    if not np.isfinite(loss_value):
        raise NonFinite(f"{context} loss became non-finite")


def predict_tv(model, sample: Sample) -> np.ndarray:
    """Eval-mode TV prediction (free-running for the chunked model)."""
    if isinstance(model, BaselineModel):
        tv, _ = model.forward(sample.features, training=False)
    else:
        tv, _ = model.forward(sample.features, teacher_tv=None, training=False)
    return tv.data


def _validate(model, val: list[Sample]) -> tuple[float, float]:
    """(TV-MAE, mean per-channel PCC) over the concatenated validation set."""
    preds, trues = [], []
    for s in val:
        preds.append(predict_tv(model, s))
        trues.append(s.tv)
    pred = np.vstack(preds)
    true = np.vstack(trues)
    mae = float(np.abs(pred - true).mean())
    pccs = []
    for c in range(pred.shape[1]):
        try:
            pccs.append(evalsuite.pearson(pred[:, c], true[:, c]))
        except evalsuite.ZeroVariance:
            pccs.append(0.0)
    return mae, float(np.mean(pccs))


def train(model, train_samples: list[Sample], val_samples: list[Sample],
          cfg: TrainConfig, disc: Discriminator | None = None,
          adv_weight: float = 1.0) -> TrainResult:
    """Fit ``model`` (and ``disc`` when adversarial) in place; the model is
    left holding the best-validation-MAE parameters."""
    if not train_samples or not val_samples:
        raise ShapeMismatch("need non-empty train and validation sets")
    rng = np.random.default_rng(cfg.seed)
    g_params = model.named_parameters()
    d_params = disc.named_parameters() if disc is not None else {}
    result = TrainResult()
    best_state: dict[str, np.ndarray] = {}
    best_buffers: dict[str, np.ndarray] = {}
    bad_epochs = 0

    for epoch in range(cfg.epochs):
        ep_loss, ep_d, ep_g_adv, n_adv = 0.0, 0.0, 0.0, 0
        order = rng.permutation(len(train_samples))
        for idx in order:
            s = train_samples[idx]
            if isinstance(model, BaselineModel):
                tv, logits = model.forward(s.features, training=True, rng=rng)
                loss = baseline_loss(tv, s.tv, logits, s.labels, model.cfg.ce_weight)
            elif isinstance(model, ProposedModel):
                teacher = s.tv if cfg.teacher_forcing else None
                tv, pm = model.forward(s.features, teacher_tv=teacher, training=True, rng=rng)
                loss = mae_loss(tv, s.tv) + model.cfg.pm_weight * mae_loss(pm, s.pm)
                can_score = disc is not None and s.tv.shape[0] >= disc.receptive_field
                if can_score:
                    # discriminator step on detached generator output
                    d_real, feats_real = disc.forward(Tensor(s.tv), return_features=True)
                    d_fake_det = disc.forward(tv.detach())
                    d_loss, _ = lsgan_losses(d_real, d_fake_det)
                    zero_grad(list(d_params.values()))
                    d_loss.backward()
                    clip_global_norm(list(d_params.values()), cfg.clip_norm)
                    adam_step(d_params, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps)
                    _check_finite(d_loss.item(), "discriminator")
                    ep_d += d_loss.item()
                    # adversarial term for the generator
                    if model.cfg.feature_matching:
                        d_fake, feats_fake = disc.forward(tv, return_features=True)
                        fm = sum(mae_loss(ff, fr.data) for ff, fr in zip(feats_fake, feats_real))
                        loss = loss + adv_weight * (tmean(square(d_fake - 1.0)) + fm)
                    else:
                        d_fake = disc.forward(tv)
                        loss = loss + adv_weight * tmean(square(d_fake - 1.0))
                    ep_g_adv += tmean(square(Tensor(d_fake.data) - 1.0)).item()
                    n_adv += 1
            elif isinstance(model, DecoderModel):
                pred = model.forward(s.features, training=True, rng=rng)
                loss = mae_loss(pred, s.target)
            else:
                raise ShapeMismatch(f"unknown model type {type(model).__name__}")
            _check_finite(loss.item(), "training")
            zero_grad(list(g_params.values()))
            if d_params:
                zero_grad(list(d_params.values()))  # drop grads leaking via d_fake
            loss.backward()
            clip_global_norm(list(g_params.values()), cfg.clip_norm)
            adam_step(g_params, cfg.lr, cfg.beta1, cfg.beta2, cfg.adam_eps)
            ep_loss += loss.item()

        if isinstance(model, DecoderModel):
            preds = [model.forward(s.features, training=False).data for s in val_samples]
            val_mae = float(np.mean([np.abs(p - s.target).mean()
                                     for p, s in zip(preds, val_samples)]))
            val_pcc = float("nan")
        else:
            val_mae, val_pcc = _validate(model, val_samples)
        result.log_rows.append({
            "epoch": epoch,
            "train_loss": ep_loss / len(train_samples),
            "d_loss": ep_d / n_adv if n_adv else float("nan"),
            "g_adv": ep_g_adv / n_adv if n_adv else float("nan"),
            "val_mae": val_mae,
            "val_pcc": val_pcc,
        })
        if val_mae < result.best_val_mae - 1e-9:
            result.best_val_mae = val_mae
            result.best_epoch = epoch
            best_state = {k: p.data.copy() for k, p in g_params.items()}
            best_buffers = {k: v.copy() for k, v in model.named_buffers().items()}
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs > cfg.patience:
                result.stopped_early = True
                break

    for k, p in g_params.items():
        p.data = best_state[k]
    for k, v in best_buffers.items():
        model.set_buffer(k, v)
    return result
