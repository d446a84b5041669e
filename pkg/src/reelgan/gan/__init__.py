"""Multi-tower dilated DCGAN over melody grids."""

from .checkpoint import Checkpoint, CheckpointError, latest_checkpoint, load_checkpoint, restore_gan, sample, save_checkpoint
from .models import (
    Discriminator, DiscriminatorSpec, Generator, GeneratorSpec, TowerSpec,
    default_discriminator_spec, default_generator_spec, default_towers,
)
from .train import ReelGAN, TrainConfig, TrainResult, train, train_step

__all__ = [
    "Checkpoint", "CheckpointError", "Discriminator", "DiscriminatorSpec", "Generator", "GeneratorSpec",
    "ReelGAN", "TowerSpec", "TrainConfig", "TrainResult", "default_discriminator_spec",
    "default_generator_spec", "default_towers", "latest_checkpoint", "load_checkpoint", "restore_gan",
    "sample", "save_checkpoint", "train", "train_step",
]
