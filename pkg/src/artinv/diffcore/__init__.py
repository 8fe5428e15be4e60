"""Minimal reverse-mode autodiff engine for sequence-regression models.

Double precision throughout; single-threaded and bitwise deterministic under
a fixed seed. Fused operators (GRU layer, 1-D convolution, batch norm,
cross-entropy) carry hand-derived backward passes that the test suite checks
against central finite differences.
"""

from .tensor import Tensor, Parameter, tensor, concat, matmul, tanh, sigmoid, relu, leaky_relu
from .layers import Module, Linear, MLP, GRULayer, BiGRU, BatchNorm1d, Conv1d, dropout, gru_cell
from .losses import mae_loss, cross_entropy, lsgan_losses
from .optim import adam_step, clip_global_norm, zero_grad, global_grad_norm
from .checkpoint import save_checkpoint, load_checkpoint

__all__ = [
    "Tensor", "Parameter", "tensor", "concat", "matmul", "tanh", "sigmoid",
    "relu", "leaky_relu", "Module", "Linear", "MLP", "GRULayer", "BiGRU",
    "BatchNorm1d", "Conv1d", "dropout", "gru_cell", "mae_loss",
    "cross_entropy", "lsgan_losses", "adam_step", "clip_global_norm",
    "zero_grad", "global_grad_norm", "save_checkpoint", "load_checkpoint",
]
