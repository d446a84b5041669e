"""Minimal reverse-mode neural-network substrate (numpy, channels-last)."""

from .gradcheck import GradCheckReport, directional_check, grad_check
from .layers import BatchNorm, Conv2D, Conv2DTranspose, Dense
from .ops import (
    ConvSpec, activation, add, batch_norm, bce_loss, concat, conv2d, conv2d_transpose, dense,
    leaky_relu, mean_all, mul, relu, reshape, sigmoid, sum_all, tanh,
)
from .optim import AdamState, adam_step
from .tensor import Tensor

__all__ = [
    "AdamState", "BatchNorm", "Conv2D", "Conv2DTranspose", "ConvSpec", "Dense", "GradCheckReport",
    "Tensor", "activation", "adam_step", "add", "batch_norm", "bce_loss", "concat", "conv2d",
    "conv2d_transpose", "dense", "directional_check", "grad_check", "leaky_relu", "mean_all", "mul",
    "relu", "reshape", "sigmoid", "sum_all", "tanh",
]
