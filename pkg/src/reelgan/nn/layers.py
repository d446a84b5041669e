"""Parameter-owning layers built on the primitives in :mod:`.ops`."""

from __future__ import annotations

import numpy as np

from . import ops
from .ops import ConvSpec
from .tensor import Tensor


def _normal(rng, shape, std, dtype):
    return Tensor(rng.normal(0.0, std, size=shape).astype(dtype), requires_grad=True)


def _zeros(shape, dtype):
    return Tensor(np.zeros(shape, dtype=dtype), requires_grad=True)


class Layer:
    def __init__(self):
        self.params: dict[str, Tensor] = {}
        self.buffers: dict[str, np.ndarray] = {}


class Dense(Layer):
    def __init__(self, n_in: int, n_out: int, rng, dtype=np.float32, init_std=0.02):
        super().__init__()
        self.n_in, self.n_out = n_in, n_out
        self.params["kernel"] = _normal(rng, (n_in, n_out), init_std, dtype)
        self.params["bias"] = _zeros((n_out,), dtype)

    def __call__(self, x):
        return ops.dense(x, self.params["kernel"], self.params["bias"])


class Conv2D(Layer):
    def __init__(self, in_channels: int, spec: ConvSpec, rng, dtype=np.float32, init_std=0.02):
        super().__init__()
        self.spec = spec
        kh, kw = spec.kernel
        self.params["kernel"] = _normal(rng, (kh, kw, in_channels, spec.filters), init_std, dtype)
        self.params["bias"] = _zeros((spec.filters,), dtype)

    def __call__(self, x):
        return ops.conv2d(x, self.params["kernel"], self.params["bias"], self.spec)


class Conv2DTranspose(Layer):
    def __init__(self, in_channels: int, spec: ConvSpec, rng, dtype=np.float32, init_std=0.02):
        super().__init__()
        self.spec = spec
        kh, kw = spec.kernel
        self.params["kernel"] = _normal(rng, (kh, kw, spec.filters, in_channels), init_std, dtype)
        self.params["bias"] = _zeros((spec.filters,), dtype)

    def __call__(self, x):
        return ops.conv2d_transpose(x, self.params["kernel"], self.params["bias"], self.spec)


class BatchNorm(Layer):
    def __init__(self, channels: int, dtype=np.float32, momentum=0.9, eps=1e-5):
        super().__init__()
        self.momentum, self.eps = momentum, eps
        self.params["gamma"] = Tensor(np.ones(channels, dtype=dtype), requires_grad=True)
        self.params["beta"] = _zeros((channels,), dtype)
        self.buffers["running_mean"] = np.zeros(channels, dtype=dtype)
        self.buffers["running_var"] = np.ones(channels, dtype=dtype)

    def __call__(self, x, train: bool = True):
        return ops.batch_norm(
            x,
            self.params["gamma"],
            self.params["beta"],
            mode="train" if train else "infer",
            running_mean=self.buffers["running_mean"],
            running_var=self.buffers["running_var"],
            momentum=self.momentum,
            eps=self.eps,
        )
