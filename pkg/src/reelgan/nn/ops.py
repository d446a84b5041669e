"""Differentiable primitives on channels-last (N, H, W, C) arrays."""

from __future__ import annotations

import contextlib
import math
from dataclasses import dataclass

import numpy as np

from .tensor import Tensor, as_tensor, result

BCE_CLAMP = 1e-7

# When not None, piecewise-linear activations append their branch masks here
# so a gradient checker can tell when a perturbation crossed a kink.
_kink_log: list | None = None
# When not None, piecewise-linear activations take their branch masks from
# this iterator instead of from the sign of their input.
_kink_replay = None


@contextlib.contextmanager
def record_kinks():
    global _kink_log
    previous, _kink_log = _kink_log, []
    try:
        yield _kink_log
    finally:
        _kink_log = previous


@contextlib.contextmanager
def freeze_kinks(masks):
    """Evaluate relu-type activations on the given linear pieces (in call order)."""
    global _kink_replay
    previous, _kink_replay = _kink_replay, iter(masks)
    try:
        yield
    finally:
        _kink_replay = previous


# --------------------------------------------------------------------------
# elementwise and structural ops


def add(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ValueError(f"add: shapes differ {a.shape} vs {b.shape}")

    def backward(g):
        a.accumulate(g)
        b.accumulate(g)

    return result(a.data + b.data, (a, b), backward)


def mul(a, b) -> Tensor:
    a, b = as_tensor(a), as_tensor(b)
    if a.shape != b.shape:
        raise ValueError(f"mul: shapes differ {a.shape} vs {b.shape}")

    def backward(g):
        a.accumulate(g * b.data)
        b.accumulate(g * a.data)

    return result(a.data * b.data, (a, b), backward)


def sum_all(x) -> Tensor:
    x = as_tensor(x)

    def backward(g):
        x.accumulate(np.broadcast_to(g, x.shape))

    return result(np.sum(x.data, dtype=np.float64), (x,), backward)


def mean_all(x) -> Tensor:
    x = as_tensor(x)
    n = x.data.size

    def backward(g):
        x.accumulate(np.broadcast_to(g / n, x.shape))

    return result(np.sum(x.data, dtype=np.float64) / n, (x,), backward)


def reshape(x, shape) -> Tensor:
    x = as_tensor(x)

    def backward(g):
        x.accumulate(g.reshape(x.shape))

    return result(x.data.reshape(shape), (x,), backward)


def concat(tensors, axis=-1) -> Tensor:
    tensors = [as_tensor(t) for t in tensors]
    sizes = [t.shape[axis] for t in tensors]
    bounds = np.cumsum([0] + sizes)

    def backward(g):
        for t, lo, hi in zip(tensors, bounds[:-1], bounds[1:]):
            index = [slice(None)] * g.ndim
            index[axis] = slice(lo, hi)
            t.accumulate(g[tuple(index)])

    return result(np.concatenate([t.data for t in tensors], axis=axis), tuple(tensors), backward)


# --------------------------------------------------------------------------
# activations


def relu(x) -> Tensor:
    return leaky_relu(x, 0.0)


def leaky_relu(x, alpha=0.2) -> Tensor:
    x = as_tensor(x)
    positive = x.data > 0
    if _kink_replay is not None:
        frozen = next(_kink_replay)
        if frozen.shape != positive.shape:
            raise ValueError("frozen activation mask does not match the graph being evaluated")
        positive = frozen
    if _kink_log is not None:
        _kink_log.append(positive)
    scale = np.where(positive, 1.0, alpha)

    def backward(g):
        x.accumulate(g * scale)

    return result(x.data * scale, (x,), backward)


def sigmoid(x) -> Tensor:
    x = as_tensor(x)
    out = 0.5 * (1.0 + np.tanh(0.5 * np.asarray(x.data, dtype=np.float64)))

    def backward(g):
        x.accumulate(g * out * (1.0 - out))

    return result(out, (x,), backward)


def tanh(x) -> Tensor:
    x = as_tensor(x)
    out = np.tanh(np.asarray(x.data, dtype=np.float64))

    def backward(g):
        x.accumulate(g * (1.0 - out * out))

    return result(out, (x,), backward)


def activation(kind: str, x, alpha: float = 0.2) -> Tensor:
    if kind == "leaky_relu":
        return leaky_relu(x, alpha)
    if kind == "relu":
        return relu(x)
    if kind == "sigmoid":
        return sigmoid(x)
    if kind == "tanh":
        return tanh(x)
    if kind in ("linear", "none"):
        return as_tensor(x)
    raise ValueError(f"unknown activation {kind!r}")


# --------------------------------------------------------------------------
# affine layers


def dense(x, w, b) -> Tensor:
    x, w, b = as_tensor(x), as_tensor(w), as_tensor(b)
    if x.data.ndim != 2 or w.data.ndim != 2 or x.shape[1] != w.shape[0]:
        raise ValueError(f"dense: cannot apply {w.shape} weights to {x.shape} input")
    if b.shape != (w.shape[1],):
        raise ValueError(f"dense: bias shape {b.shape} does not match {w.shape[1]} outputs")
    xd = np.asarray(x.data, dtype=np.float64)
    wd = np.asarray(w.data, dtype=np.float64)
    out = xd @ wd + b.data

    def backward(g):
        x.accumulate(g @ wd.T)
        w.accumulate(xd.T @ g)
        b.accumulate(g.sum(axis=0))

    return result(out, (x, w, b), backward)


@dataclass(frozen=True)
class ConvSpec:
    kernel: tuple[int, int]
    dilation: tuple[int, int] = (1, 1)
    stride: tuple[int, int] = (1, 1)
    padding: str = "same"  # "same" (zero padding) or "valid"
    filters: int = 1

    def __post_init__(self):
        for name in ("kernel", "dilation", "stride"):
            value = tuple(getattr(self, name))
            if len(value) != 2 or min(value) < 1:
                raise ValueError(f"ConvSpec.{name} must be two positive integers, got {value}")
            object.__setattr__(self, name, value)
        if self.padding not in ("same", "valid"):
            raise ValueError(f"padding must be 'same' or 'valid', got {self.padding!r}")
        if self.filters < 1:
            raise ValueError("filters must be positive")

    @property
    def extent(self) -> tuple[int, int]:
        return tuple(k + (k - 1) * (d - 1) for k, d in zip(self.kernel, self.dilation))

    def geometry(self, size: int, axis: int) -> tuple[int, int, int]:
        """Output length and (before, after) zero padding along one spatial axis."""
        e, s = self.extent[axis], self.stride[axis]
        if self.padding == "same":
            out = math.ceil(size / s)
            total = max((out - 1) * s + e - size, 0)
            return out, total // 2, total - total // 2
        if e > size:
            raise ValueError(f"kernel extent {e} exceeds input size {size}")
        return (size - e) // s + 1, 0, 0

    def output_hw(self, h: int, w: int) -> tuple[int, int]:
        return self.geometry(h, 0)[0], self.geometry(w, 1)[0]


def _im2col(xp, spec: ConvSpec, oh: int, ow: int) -> np.ndarray:
    n, _, _, c = xp.shape
    kh, kw = spec.kernel
    dr, dc = spec.dilation
    sr, sc = spec.stride
    cols = np.empty((n, oh, ow, kh, kw, c), dtype=np.float64)
    for i in range(kh):
        r0 = i * dr
        for j in range(kw):
            c0 = j * dc
            cols[:, :, :, i, j, :] = xp[:, r0:r0 + sr * (oh - 1) + 1:sr, c0:c0 + sc * (ow - 1) + 1:sc, :]
    return cols.reshape(n, oh, ow, kh * kw * c)


def _col2im(cols, spec: ConvSpec, padded_shape, oh: int, ow: int) -> np.ndarray:
    n, hp, wp, c = padded_shape
    kh, kw = spec.kernel
    dr, dc = spec.dilation
    sr, sc = spec.stride
    cols = cols.reshape(n, oh, ow, kh, kw, c)
    out = np.zeros(padded_shape, dtype=np.float64)
    # fixed tap order keeps the overlapping sums reproducible
    for i in range(kh):
        r0 = i * dr
        for j in range(kw):
            c0 = j * dc
            out[:, r0:r0 + sr * (oh - 1) + 1:sr, c0:c0 + sc * (ow - 1) + 1:sc, :] += cols[:, :, :, i, j, :]
    return out


def _pad(x, pads):
    (pt, pb), (pl, pr) = pads
    if not (pt or pb or pl or pr):
        return np.asarray(x, dtype=np.float64)
    return np.pad(np.asarray(x, dtype=np.float64), ((0, 0), (pt, pb), (pl, pr), (0, 0)))


def _crop(x, pads, h, w):
    (pt, _), (pl, _) = pads
    return x[:, pt:pt + h, pl:pl + w, :]


def conv2d(x, w, b, spec: ConvSpec) -> Tensor:
    """Dilated, strided cross-correlation.

    ``w`` has shape ``(kh, kw, in_channels, filters)``.
    """
    x, w, b = as_tensor(x), as_tensor(w), as_tensor(b)
    if x.data.ndim != 4:
        raise ValueError(f"conv2d expects (N, H, W, C) input, got {x.shape}")
    n, h, wd, c = x.shape
    kh, kw = spec.kernel
    if w.shape != (kh, kw, c, spec.filters):
        raise ValueError(f"conv2d: weights {w.shape} do not match kernel {spec.kernel}, {c} channels, {spec.filters} filters")
    if b.shape != (spec.filters,):
        raise ValueError(f"conv2d: bias shape {b.shape}")
    oh, pt, pb = spec.geometry(h, 0)
    ow, pl, pr = spec.geometry(wd, 1)
    pads = ((pt, pb), (pl, pr))
    xp = _pad(x.data, pads)
    cols = _im2col(xp, spec, oh, ow).reshape(-1, kh * kw * c)
    wmat = np.asarray(w.data, dtype=np.float64).reshape(kh * kw * c, spec.filters)
    out = (cols @ wmat + b.data).reshape(n, oh, ow, spec.filters)

    def backward(g):
        g2 = g.reshape(-1, spec.filters)
        if x.requires_grad:
            dcols = g2 @ wmat.T
            dxp = _col2im(dcols, spec, xp.shape, oh, ow)
            x.accumulate(_crop(dxp, pads, h, wd))
        w.accumulate((cols.T @ g2).reshape(w.shape))
        b.accumulate(g2.sum(axis=0))

    return result(out, (x, w, b), backward)


def conv2d_transpose(y, w, b, spec: ConvSpec, output_hw=None) -> Tensor:
    """Adjoint of :func:`conv2d` with respect to its input.

    ``w`` has shape ``(kh, kw, filters, in_channels)``: it is the weight of
    the forward convolution that maps the ``filters``-channel output back
    to this op's input. The default output size is ``input * stride``.
    """
    y, w, b = as_tensor(y), as_tensor(w), as_tensor(b)
    if y.data.ndim != 4:
        raise ValueError(f"conv2d_transpose expects (N, H, W, C) input, got {y.shape}")
    n, ih, iw, cin = y.shape
    kh, kw = spec.kernel
    f = spec.filters
    if w.shape != (kh, kw, f, cin):
        raise ValueError(f"conv2d_transpose: weights {w.shape} do not match kernel {spec.kernel}, {f} filters, {cin} channels")
    if b.shape != (f,):
        raise ValueError(f"conv2d_transpose: bias shape {b.shape}")
    oh, ow = output_hw if output_hw is not None else (ih * spec.stride[0], iw * spec.stride[1])
    gh, pt, pb = spec.geometry(oh, 0)
    gw, pl, pr = spec.geometry(ow, 1)
    if (gh, gw) != (ih, iw):
        raise ValueError(f"conv2d_transpose: output {oh}x{ow} is inconsistent with input {ih}x{iw}")
    pads = ((pt, pb), (pl, pr))
    padded_shape = (n, oh + pt + pb, ow + pl + pr, f)
    wmat = np.asarray(w.data, dtype=np.float64).reshape(kh * kw * f, cin)
    yd = np.asarray(y.data, dtype=np.float64).reshape(-1, cin)
    cols = yd @ wmat.T
    out = _crop(_col2im(cols, spec, padded_shape, ih, iw), pads, oh, ow) + b.data

    def backward(g):
        gp = _pad(g, pads)
        gcols = _im2col(gp, spec, ih, iw).reshape(-1, kh * kw * f)
        if y.requires_grad:
            y.accumulate((gcols @ wmat).reshape(y.shape))
        w.accumulate((gcols.T @ yd).reshape(w.shape))
        b.accumulate(g.reshape(-1, f).sum(axis=0))

    return result(np.ascontiguousarray(out), (y, w, b), backward)


# --------------------------------------------------------------------------
# normalisation and loss


def batch_norm(x, gamma, beta, mode="train", running_mean=None, running_var=None, momentum=0.9, eps=1e-5) -> Tensor:
    """Per-channel (last axis) batch normalisation.

    In train mode the running statistics, when given, are updated in place as
    ``running = momentum * running + (1 - momentum) * batch``.
    """
    x, gamma, beta = as_tensor(x), as_tensor(gamma), as_tensor(beta)
    c = x.shape[-1]
    if gamma.shape != (c,) or beta.shape != (c,):
        raise ValueError(f"batch_norm: scale/shift must have shape ({c},)")
    axes = tuple(range(x.data.ndim - 1))
    xd = np.asarray(x.data, dtype=np.float64)
    if mode == "train":
        if x.shape[0] < 2:
            raise ValueError("batch_norm in train mode needs a batch of at least 2")
        mean = xd.mean(axis=axes)
        var = xd.var(axis=axes)
        if running_mean is not None:
            running_mean[...] = momentum * running_mean + (1 - momentum) * mean
            running_var[...] = momentum * running_var + (1 - momentum) * var
    elif mode == "infer":
        mean = np.asarray(running_mean, dtype=np.float64)
        var = np.asarray(running_var, dtype=np.float64)
    else:
        raise ValueError(f"batch_norm mode must be 'train' or 'infer', got {mode!r}")
    inv_std = 1.0 / np.sqrt(var + eps)
    xhat = (xd - mean) * inv_std
    out = xhat * gamma.data + beta.data
    m = xd.size // c

    def backward(g):
        gamma.accumulate((g * xhat).sum(axis=axes))
        beta.accumulate(g.sum(axis=axes))
        if not x.requires_grad:
            return
        gx = g * gamma.data
        if mode == "train":
            dx = inv_std / m * (m * gx - gx.sum(axis=axes) - xhat * (gx * xhat).sum(axis=axes))
        else:
            dx = gx * inv_std
        x.accumulate(dx)

    return result(out, (x, gamma, beta), backward)


def bce_loss(p, labels) -> Tensor:
    """Mean binary cross-entropy; probabilities are clamped to [1e-7, 1-1e-7]."""
    p = as_tensor(p)
    y = np.broadcast_to(np.asarray(labels, dtype=np.float64), p.shape)
    raw = np.asarray(p.data, dtype=np.float64)
    q = np.clip(raw, BCE_CLAMP, 1.0 - BCE_CLAMP)
    n = max(q.size, 1)
    loss = -np.sum(y * np.log(q) + (1.0 - y) * np.log(1.0 - q)) / n
    inside = (raw >= BCE_CLAMP) & (raw <= 1.0 - BCE_CLAMP)

    def backward(g):
        dp = (-(y / q) + (1.0 - y) / (1.0 - q)) / n
        p.accumulate(g * dp * inside)

    return result(loss, (p,), backward)
