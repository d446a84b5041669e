from __future__ import annotations

import csv
import logging
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .. import nn
from .models import Discriminator, DiscriminatorSpec, Generator, GeneratorSpec

log = logging.getLogger(__name__)

LOSS_COLUMNS = ("epoch", "step", "d_real", "d_fake", "g")


@dataclass
class TrainConfig:
    batch_size: int = 64
    epochs: int = 1
    seed: int = 0
    lr_d: float = 2e-4
    lr_g: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    adam_eps: float = 1e-8
    checkpoint_every: int = 0  # epochs between checkpoints; 0 = final only

    def __post_init__(self):
        if self.batch_size < 2:
            raise ValueError("batch_size must be at least 2 (the generator uses batch normalisation)")
        if self.epochs < 1:
            raise ValueError("epochs must be at least 1")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class ReelGAN:
    """Both networks, their optimiser states and the training RNG."""

    d_spec: DiscriminatorSpec
    g_spec: GeneratorSpec
    discriminator: Discriminator
    generator: Generator
    opt_d: nn.AdamState
    opt_g: nn.AdamState
    rng: np.random.Generator
    epoch: int = 0
    step: int = 0
    config: TrainConfig = field(default_factory=TrainConfig)

    @classmethod
    def create(cls, config: TrainConfig, d_spec=None, g_spec=None, dtype=np.float32) -> "ReelGAN":
        d_spec = d_spec or DiscriminatorSpec()
        g_spec = g_spec or GeneratorSpec()
        rng = np.random.default_rng(config.seed)
        disc = Discriminator(d_spec, rng, dtype)
        gen = Generator(g_spec, rng, dtype)
        opt = dict(beta1=config.beta1, beta2=config.beta2, eps=config.adam_eps)
        return cls(d_spec, g_spec, disc, gen, nn.AdamState(lr=config.lr_d, **opt), nn.AdamState(lr=config.lr_g, **opt), rng, config=config)


def _grads(net) -> dict:
    return {name: p.grad for name, p in net.named_parameters().items()}


def train_step(gan: ReelGAN, real_batch, rng) -> tuple[float, float, float]:
    """One discriminator update then one non-saturating generator update.

    Returns the pre-update losses (d_real, d_fake, g).
    """
    real = np.asarray(real_batch, dtype=np.float64)
    n = real.shape[0]
    if n < 2:
        raise ValueError("train_step needs a batch of at least 2 grids")
    real = real.reshape(n, 4, 64, 1)
    disc, gen = gan.discriminator, gan.generator
    latent = gan.g_spec.latent_dim

    z = rng.standard_normal((n, latent))
    fake = gen(z, train=True).detach()
    disc.zero_grad()
    loss_real = nn.bce_loss(disc(real), np.ones(n))
    loss_fake = nn.bce_loss(disc(fake), np.zeros(n))
    nn.add(loss_real, loss_fake).backward()
    nn.adam_step(disc.named_parameters(), _grads(disc), gan.opt_d)

    z = rng.standard_normal((n, latent))
    gen.zero_grad()
    disc.zero_grad()
    loss_g = nn.bce_loss(disc(gen(z, train=True)), np.ones(n))
    loss_g.backward()
    nn.adam_step(gen.named_parameters(), _grads(gen), gan.opt_g)
    disc.zero_grad()
    gan.step += 1
    return float(loss_real.data), float(loss_fake.data), float(loss_g.data)


def _batches(n: int, batch_size: int, rng) -> list[np.ndarray]:
    order = rng.permutation(n)
    batches = [order[i:i + batch_size] for i in range(0, n, batch_size)]
    if len(batches) > 1 and len(batches[-1]) < 2:
        # a singleton batch cannot be batch-normalised; borrow from the front
        batches[-1] = np.concatenate([batches[-1], order[: 2 - len(batches[-1])]])
    return batches


@dataclass
class TrainResult:
    gan: ReelGAN
    losses: list[tuple]
    checkpoints: list[Path]


def train(
    config: TrainConfig,
    dataset,
    out_dir: str | Path | None = None,
    gan: ReelGAN | None = None,
    d_spec: DiscriminatorSpec | None = None,
    g_spec: GeneratorSpec | None = None,
) -> TrainResult:
    """Adversarial training over seeded, shuffled minibatches.

    Passing ``gan`` (e.g. restored from a checkpoint) resumes at its epoch
    counter and RNG state. With ``out_dir`` a loss log ``losses.csv`` and
    ``ckpt_epochNNNNN.rgan`` files are written.
    """
    from .checkpoint import save_checkpoint

    data = np.asarray(dataset, dtype=np.float32).reshape(-1, 4, 64)
    if len(data) == 0:
        raise ValueError("cannot train on an empty dataset")
    if len(data) == 1:
        raise ValueError("need at least 2 grids to form a batch-normalised batch")
    batch_size = config.batch_size
    if len(data) < batch_size:
        log.warning("dataset has %d grids, fewer than batch size %d; using the full set as one batch", len(data), batch_size)
        batch_size = len(data)
    if gan is None:
        gan = ReelGAN.create(config, d_spec, g_spec)
    gan.config = config

    out = Path(out_dir) if out_dir is not None else None
    log_path = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        log_path = out / "losses.csv"
        _prepare_log(log_path, gan.epoch)

    losses, checkpoints = [], []
    first = gan.epoch + 1
    for epoch in range(first, config.epochs + 1):
        rows = []
        for idx in _batches(len(data), batch_size, gan.rng):
            d_real, d_fake, g = train_step(gan, data[idx], gan.rng)
            rows.append((epoch, gan.step, d_real, d_fake, g))
        gan.epoch = epoch
        losses.extend(rows)
        if log_path is not None:
            with open(log_path, "a", newline="") as fh:
                csv.writer(fh, lineterminator="\n").writerows(_format_row(r) for r in rows)
        due = config.checkpoint_every and epoch % config.checkpoint_every == 0
        if out is not None and (due or epoch == config.epochs):
            path = out / f"ckpt_epoch{epoch:05d}.rgan"
            save_checkpoint(path, gan)
            checkpoints.append(path)
        last = rows[-1]
        log.info("epoch %d step %d d_real=%.4f d_fake=%.4f g=%.4f", *last)
    return TrainResult(gan, losses, checkpoints)


def _format_row(row):
    epoch, step, d_real, d_fake, g = row
    return [epoch, step, repr(d_real), repr(d_fake), repr(g)]


def _prepare_log(path: Path, resume_epoch: int):
    """Create the log, or drop rows past ``resume_epoch`` when resuming."""
    if resume_epoch == 0 or not path.exists():
        with open(path, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerow(LOSS_COLUMNS)
        return
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    keep = [rows[0]] + [r for r in rows[1:] if r and int(r[0]) <= resume_epoch]
    with open(path, "w", newline="") as fh:
        csv.writer(fh, lineterminator="\n").writerows(keep)


def steps_per_epoch(n: int, batch_size: int) -> int:
    return math.ceil(n / min(batch_size, n))
