"""Run configuration: INI-style file sections, overridable by command-line flags.

Precedence is built-in defaults < ``--config`` file < explicit flags.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

from .abc import FilterGates
from .abc.parser import parse_meter
from .gan import DiscriminatorSpec, GeneratorSpec, TowerSpec, TrainConfig
from .grid import NormalizationSpec
from .metrics import TsneConfig

DEFAULT_TOWERS = "2x9@1x1,1x3@1x4,1x3@1x16,4x3@1x16,2x3@2x16,2x5@1x4"


class ConfigError(ValueError):
    pass


@dataclass
class RunSection:
    seed: int = 0
    threads: int = 1
    verbose: bool = False


@dataclass
class CorpusSection:
    meters: str = "4/4"
    mode: str = "major"
    bar_count: int = 16
    min_pitch: int = 62
    max_pitch: int = 86


@dataclass
class CodecSection:
    center_midi: int = 74
    half_range: int = 12


@dataclass
class ModelSection:
    latent_dim: int = 100
    towers: str = DEFAULT_TOWERS
    tower_filters: int = 32
    merge: str = "channels"
    head_filters: int = 64
    dense_units: int = 1024
    leaky_alpha: float = 0.2
    strict_bn: bool = False
    bn_momentum: float = 0.9
    init_std: float = 0.02


@dataclass
class TrainSection:
    batch_size: int = 64
    epochs: int = 1
    lr_d: float = 2e-4
    lr_g: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    adam_eps: float = 1e-8
    checkpoint_every: int = 0


@dataclass
class TsneSection:
    perplexity: float = 50.0
    iterations: int = 1000
    learning_rate: float = 200.0
    exaggeration: float = 12.0
    exaggeration_iters: int = 250
    momentum_initial: float = 0.5
    momentum_final: float = 0.8
    momentum_switch: int = 250


@dataclass
class MetricsSection:
    normalization: str = "max"


@dataclass
class RunConfig:
    run: RunSection = field(default_factory=RunSection)
    corpus: CorpusSection = field(default_factory=CorpusSection)
    codec: CodecSection = field(default_factory=CodecSection)
    model: ModelSection = field(default_factory=ModelSection)
    train: TrainSection = field(default_factory=TrainSection)
    tsne: TsneSection = field(default_factory=TsneSection)
    metrics: MetricsSection = field(default_factory=MetricsSection)

    # -- views consumed by the library -------------------------------------

    def filter_gates(self) -> FilterGates:
        c = self.corpus
        meters = tuple(parse_meter(m) for m in c.meters.split(",") if m.strip())
        return FilterGates(meters=meters, mode=c.mode, bar_count=c.bar_count, min_pitch=c.min_pitch, max_pitch=c.max_pitch)

    def normalization(self) -> NormalizationSpec:
        return NormalizationSpec(self.codec.center_midi, self.codec.half_range)

    def discriminator_spec(self) -> DiscriminatorSpec:
        m = self.model
        return DiscriminatorSpec(
            towers=parse_towers(m.towers, m.tower_filters),
            merge=m.merge,
            head_filters=m.head_filters,
            dense_units=m.dense_units,
            leaky_alpha=m.leaky_alpha,
            init_std=m.init_std,
        )

    def generator_spec(self) -> GeneratorSpec:
        m = self.model
        return GeneratorSpec(latent_dim=m.latent_dim, bn_output=m.strict_bn, bn_momentum=m.bn_momentum, init_std=m.init_std)

    def train_config(self) -> TrainConfig:
        t = self.train
        return TrainConfig(
            batch_size=t.batch_size, epochs=t.epochs, seed=self.run.seed, lr_d=t.lr_d, lr_g=t.lr_g,
            beta1=t.beta1, beta2=t.beta2, adam_eps=t.adam_eps, checkpoint_every=t.checkpoint_every,
        )

    def tsne_config(self) -> TsneConfig:
        t = self.tsne
        return TsneConfig(
            perplexity=t.perplexity, iterations=t.iterations, learning_rate=t.learning_rate,
            exaggeration=t.exaggeration, exaggeration_iters=t.exaggeration_iters,
            momentum_initial=t.momentum_initial, momentum_final=t.momentum_final,
            momentum_switch=t.momentum_switch, seed=self.run.seed,
        )


def parse_towers(text: str, filters: int) -> tuple[TowerSpec, ...]:
    """Parse ``KHxKW@DHxDW`` items, e.g. ``2x9@1x1,1x3@1x16``."""
    towers = []
    for item in text.split(","):
        item = item.strip()
        try:
            kernel, dilation = item.split("@")
            kh, kw = (int(v) for v in kernel.split("x"))
            dh, dw = (int(v) for v in dilation.split("x"))
        except ValueError:
            raise ConfigError(f"bad tower pattern {item!r} (expected KHxKW@DHxDW)") from None
        towers.append(TowerSpec(f"{kh}x{kw}_d{dh}x{dw}", (kh, kw), (dh, dw), filters))
    return tuple(towers)


def iter_keys(config: RunConfig | None = None):
    """Yield (section, key, value) for every configuration field."""
    config = config or RunConfig()
    for sec in fields(config):
        section = getattr(config, sec.name)
        for f in fields(section):
            yield sec.name, f.name, getattr(section, f.name)


def _coerce(raw, default, where: str):
    if isinstance(default, bool):
        if isinstance(raw, bool):
            return raw
        text = str(raw).strip().lower()
        if text in ("1", "true", "yes", "on"):
            return True
        if text in ("0", "false", "no", "off"):
            return False
        raise ConfigError(f"{where}: expected a boolean, got {raw!r}")
    try:
        return type(default)(raw)
    except (TypeError, ValueError):
        raise ConfigError(f"{where}: expected {type(default).__name__}, got {raw!r}") from None


def with_values(config: RunConfig, values: dict[tuple[str, str], object]) -> RunConfig:
    sections = {}
    for (sec, key), raw in values.items():
        if not hasattr(config, sec):
            raise ConfigError(f"unknown config section [{sec}]")
        section = sections.get(sec, getattr(config, sec))
        if key not in {f.name for f in fields(section)}:
            raise ConfigError(f"unknown config key {sec}.{key}")
        sections[sec] = replace(section, **{key: _coerce(raw, getattr(section, key), f"{sec}.{key}")})
    return replace(config, **sections)


def load_config(path: str | Path | None, overrides: dict | None = None) -> RunConfig:
    config = RunConfig()
    if path is not None:
        parser = configparser.ConfigParser(interpolation=None)
        try:
            with open(path) as fh:
                parser.read_file(fh)
        except (OSError, configparser.Error) as err:
            raise ConfigError(f"cannot read config {path}: {err}") from None
        values = {(sec, key): parser.get(sec, key) for sec in parser.sections() for key in parser.options(sec)}
        config = with_values(config, values)
    if overrides:
        config = with_values(config, overrides)
    return config


def dump_config(config: RunConfig) -> str:
    lines = []
    current = None
    for sec, key, value in iter_keys(config):
        if sec != current:
            if current is not None:
                lines.append("")
            lines.append(f"[{sec}]")
            current = sec
        lines.append(f"{key} = {str(value).lower() if isinstance(value, bool) else value}")
    return "\n".join(lines) + "\n"
