"""Discriminator (dilated convolution towers) and deconvolutional generator."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from .. import nn
from ..nn import ConvSpec

GRID_SHAPE = (4, 64)


@dataclass(frozen=True)
class TowerSpec:
    label: str
    kernel: tuple[int, int]
    dilation: tuple[int, int] = (1, 1)
    filters: int = 32

    def conv(self) -> ConvSpec:
        return ConvSpec(kernel=self.kernel, dilation=self.dilation, padding="same", filters=self.filters)


def default_towers(filters: int = 32) -> tuple[TowerSpec, ...]:
    return (
        TowerSpec("local_2x9", (2, 9), (1, 1), filters),
        TowerSpec("beats_1x3_d4", (1, 3), (1, 4), filters),
        TowerSpec("bars_1x3_d16", (1, 3), (1, 16), filters),
        TowerSpec("phrases_4x3_d16", (4, 3), (1, 16), filters),
        TowerSpec("alt_phrases_2x3_d2x16", (2, 3), (2, 16), filters),
        TowerSpec("adjacent_2x5_d4", (2, 5), (1, 4), filters),
    )


@dataclass(frozen=True)
class DiscriminatorSpec:
    towers: tuple[TowerSpec, ...] = field(default_factory=default_towers)
    merge: str = "channels"  # "channels" or "width" (literal horizontal stacking)
    head_filters: int = 64
    head_kernel: tuple[int, int] = (3, 3)
    head_stride: tuple[int, int] = (2, 2)
    dense_units: int = 1024
    leaky_alpha: float = 0.2
    init_std: float = 0.02

    def __post_init__(self):
        if self.merge not in ("channels", "width"):
            raise ValueError(f"merge must be 'channels' or 'width', got {self.merge!r}")
        if not self.towers:
            raise ValueError("discriminator needs at least one tower")

    def head_conv(self) -> ConvSpec:
        return ConvSpec(self.head_kernel, stride=self.head_stride, padding="valid", filters=self.head_filters)

    def merged_shape(self) -> tuple[int, int, int]:
        h, w = GRID_SHAPE
        if self.merge == "channels":
            return h, w, sum(t.filters for t in self.towers)
        if len({t.filters for t in self.towers}) != 1:
            raise ValueError("width merge needs equal filter counts on every tower")
        return h, w * len(self.towers), self.towers[0].filters

    def head_output_shape(self) -> tuple[int, int, int]:
        h, w, _ = self.merged_shape()
        oh, ow = self.head_conv().output_hw(h, w)
        return oh, ow, self.head_filters

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "DiscriminatorSpec":
        d = dict(d)
        d["towers"] = tuple(
            TowerSpec(t["label"], tuple(t["kernel"]), tuple(t["dilation"]), t["filters"]) for t in d["towers"]
        )
        d["head_kernel"] = tuple(d["head_kernel"])
        d["head_stride"] = tuple(d["head_stride"])
        return cls(**d)


@dataclass(frozen=True)
class GeneratorSpec:
    latent_dim: int = 100
    base_hw: tuple[int, int] = (2, 32)
    base_filters: int = 256
    hidden_filters: tuple[int, ...] = (128, 64)
    kernel: tuple[int, int] = (2, 5)
    out_stride: tuple[int, int] = (2, 2)
    bn_output: bool = False  # strict reading of "all layers use batch normalization"
    bn_momentum: float = 0.9
    bn_eps: float = 1e-5
    init_std: float = 0.02

    def output_hw(self) -> tuple[int, int]:
        return self.base_hw[0] * self.out_stride[0], self.base_hw[1] * self.out_stride[1]

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "GeneratorSpec":
        d = dict(d)
        for key in ("base_hw", "hidden_filters", "kernel", "out_stride"):
            d[key] = tuple(d[key])
        return cls(**d)


def default_discriminator_spec() -> DiscriminatorSpec:
    return DiscriminatorSpec()


def default_generator_spec() -> GeneratorSpec:
    return GeneratorSpec()


class Network:
    """Named-layer container: parameters and buffers are addressed as ``layer.param``."""

    def __init__(self):
        self.layers: dict[str, nn.layers.Layer] = {}

    def named_parameters(self) -> dict[str, nn.Tensor]:
        return {f"{ln}.{pn}": p for ln, layer in self.layers.items() for pn, p in layer.params.items()}

    def named_buffers(self) -> dict[str, np.ndarray]:
        return {f"{ln}.{bn}": b for ln, layer in self.layers.items() for bn, b in layer.buffers.items()}

    def parameter_count(self) -> int:
        return sum(p.data.size for p in self.named_parameters().values())

    def zero_grad(self):
        for p in self.named_parameters().values():
            p.zero_grad()


class Discriminator(Network):
    def __init__(self, spec: DiscriminatorSpec, rng, dtype=np.float32):
        super().__init__()
        self.spec = spec
        std = spec.init_std
        for i, tower in enumerate(spec.towers):
            self.layers[f"tower{i}"] = nn.Conv2D(1, tower.conv(), rng, dtype, std)
        h, w, c = spec.merged_shape()
        self.layers["head_conv"] = nn.Conv2D(c, spec.head_conv(), rng, dtype, std)
        oh, ow, of = spec.head_output_shape()
        self.layers["dense"] = nn.Dense(oh * ow * of, spec.dense_units, rng, dtype, std)
        self.layers["out"] = nn.Dense(spec.dense_units, 1, rng, dtype, std)

    def __call__(self, x) -> nn.Tensor:
        x = nn.tensor.as_tensor(x)
        if x.data.ndim != 4 or x.shape[1:] != (*GRID_SHAPE, 1):
            raise ValueError(f"discriminator expects (N, 4, 64, 1) input, got {x.shape}")
        alpha = self.spec.leaky_alpha
        towers = [nn.leaky_relu(self.layers[f"tower{i}"](x), alpha) for i in range(len(self.spec.towers))]
        merged = nn.concat(towers, axis=3 if self.spec.merge == "channels" else 2)
        h = nn.leaky_relu(self.layers["head_conv"](merged), alpha)
        h = nn.reshape(h, (x.shape[0], -1))
        h = nn.leaky_relu(self.layers["dense"](h), alpha)
        logits = self.layers["out"](h)
        return nn.reshape(nn.sigmoid(logits), (x.shape[0],))


class Generator(Network):
    def __init__(self, spec: GeneratorSpec, rng, dtype=np.float32):
        super().__init__()
        self.spec = spec
        std = spec.init_std
        bh, bw = spec.base_hw
        bn = dict(dtype=dtype, momentum=spec.bn_momentum, eps=spec.bn_eps)
        self.layers["dense"] = nn.Dense(spec.latent_dim, bh * bw * spec.base_filters, rng, dtype, std)
        self.layers["bn0"] = nn.BatchNorm(spec.base_filters, **bn)
        channels = spec.base_filters
        for i, filters in enumerate(spec.hidden_filters, start=1):
            conv = ConvSpec(spec.kernel, stride=(1, 1), padding="same", filters=filters)
            self.layers[f"deconv{i}"] = nn.Conv2DTranspose(channels, conv, rng, dtype, std)
            self.layers[f"bn{i}"] = nn.BatchNorm(filters, **bn)
            channels = filters
        out = ConvSpec(spec.kernel, stride=spec.out_stride, padding="same", filters=1)
        self.layers["deconv_out"] = nn.Conv2DTranspose(channels, out, rng, dtype, std)
        if spec.bn_output:
            self.layers["bn_out"] = nn.BatchNorm(1, **bn)

    def __call__(self, z, train: bool = True) -> nn.Tensor:
        z = nn.tensor.as_tensor(z)
        if z.data.ndim != 2 or z.shape[1] != self.spec.latent_dim:
            raise ValueError(f"generator expects (N, {self.spec.latent_dim}) latents, got {z.shape}")
        if not np.all(np.isfinite(z.data)):
            raise ValueError("latent vectors must be finite")
        bh, bw = self.spec.base_hw
        h = self.layers["dense"](z)
        h = nn.reshape(h, (z.shape[0], bh, bw, self.spec.base_filters))
        h = nn.relu(self.layers["bn0"](h, train))
        for i in range(1, len(self.spec.hidden_filters) + 1):
            h = nn.relu(self.layers[f"bn{i}"](self.layers[f"deconv{i}"](h), train))
        h = self.layers["deconv_out"](h)
        if self.spec.bn_output:
            h = self.layers["bn_out"](h, train)
        return nn.tanh(h)
