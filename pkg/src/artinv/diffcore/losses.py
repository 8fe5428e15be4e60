"""Training objectives: MAE, cross-entropy, and least-squares GAN losses."""

from __future__ import annotations

import numpy as np

from ..errors import ShapeMismatch
from .tensor import Tensor, _as_tensor, _make, absolute, square, tmean


def mae_loss(pred: Tensor, target) -> Tensor:
    """Mean absolute error over all elements."""
    target = _as_tensor(target)
    if pred.data.shape != target.data.shape:
        raise ShapeMismatch(f"MAE shapes differ: {pred.data.shape} vs {target.data.shape}")
    return tmean(absolute(pred - target))


def cross_entropy(logits: Tensor, class_ids: np.ndarray) -> Tensor:
    """Mean negative log-softmax of the true class, stable via logsumexp."""
    class_ids = np.asarray(class_ids)
    if logits.data.ndim != 2 or class_ids.shape != (logits.data.shape[0],):
        raise ShapeMismatch(
            f"cross entropy expects (T, C) logits and (T,) ids, got "
            f"{logits.data.shape} and {class_ids.shape}")
    z = logits.data
    T = z.shape[0]
    zmax = z.max(axis=1, keepdims=True)
    lse = zmax[:, 0] + np.log(np.exp(z - zmax).sum(axis=1))
    rows = np.arange(T)
    out = np.mean(lse - z[rows, class_ids])
    softmax = np.exp(z - lse[:, None])

    def vjp(g):
        grad = softmax.copy()
        grad[rows, class_ids] -= 1.0
        return grad * (float(g) / T)

    return _make(np.asarray(out), [(logits, vjp)])


def lsgan_losses(d_real: Tensor, d_fake_for_d: Tensor, d_fake_for_g: Tensor | None = None
                 ) -> tuple[Tensor, Tensor]:
    """Least-squares GAN objectives.

    d_loss = mean[(d_real - 1)^2 + d_fake^2], g_loss = mean[(d_fake - 1)^2].
    ``d_fake_for_d`` should be scored on detached generator output;
    ``d_fake_for_g`` (defaults to the same tensor) on the live graph.
    """
    if d_fake_for_g is None:
        d_fake_for_g = d_fake_for_d
    d_loss = tmean(square(d_real - 1.0)) + tmean(square(d_fake_for_d))
    g_loss = tmean(square(d_fake_for_g - 1.0))
    return d_loss, g_loss
