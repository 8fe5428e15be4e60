"""Inversion models: multi-task baseline, chunked-autoregressive adversarial
model, CNN discriminator, and the feature-space resynthesis decoder."""

from .models import (
    BaselineConfig,
    BaselineModel,
    DecoderConfig,
    DecoderModel,
    Discriminator,
    DiscConfig,
    ProposedConfig,
    ProposedModel,
    baseline_loss,
    proposed_loss,
)
from .train import Sample, TrainConfig, TrainResult, predict_tv, split_train_val, train

__all__ = [
    "BaselineConfig", "BaselineModel", "DecoderConfig", "DecoderModel",
    "Discriminator", "DiscConfig", "ProposedConfig", "ProposedModel",
    "baseline_loss", "proposed_loss", "Sample", "TrainConfig", "TrainResult",
    "predict_tv", "split_train_val", "train",
]
