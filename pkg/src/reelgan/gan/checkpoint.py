"""Checkpoint files: ``RGAN`` magic, version, JSON manifest, float32 blob.

Layout (little-endian)::

    b"RGAN" | u32 version | u64 manifest length | manifest (UTF-8 JSON) | blob

The manifest lists every tensor with its shape and byte offset; offsets must
tile the blob exactly.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .. import nn
from .models import Discriminator, DiscriminatorSpec, Generator, GeneratorSpec
from .train import ReelGAN, TrainConfig

MAGIC = b"RGAN"
VERSION = 1
_PREFIX = struct.Struct("<4sIQ")


class CheckpointError(ValueError):
    pass


@dataclass
class Checkpoint:
    manifest: dict
    tensors: dict[str, np.ndarray]


def _collect(gan: ReelGAN) -> dict[str, np.ndarray]:
    tensors = {}
    for prefix, net in (("d", gan.discriminator), ("g", gan.generator)):
        for name, p in net.named_parameters().items():
            tensors[f"{prefix}.{name}"] = p.data
        for name, buf in net.named_buffers().items():
            tensors[f"{prefix}.{name}"] = buf
    for prefix, opt in (("d", gan.opt_d), ("g", gan.opt_g)):
        for name in sorted(opt.m):
            tensors[f"opt.{prefix}.m.{name}"] = opt.m[name]
            tensors[f"opt.{prefix}.v.{name}"] = opt.v[name]
    return tensors


def _opt_meta(opt: nn.AdamState) -> dict:
    return {"lr": opt.lr, "beta1": opt.beta1, "beta2": opt.beta2, "eps": opt.eps, "step": opt.step}


def save_checkpoint(path: str | Path, gan: ReelGAN) -> None:
    tensors = _collect(gan)
    entries, chunks, offset = [], [], 0
    for name, arr in tensors.items():
        if arr.dtype != np.float32:
            raise CheckpointError(f"{name}: checkpoints store float32 tensors, got {arr.dtype}")
        raw = np.ascontiguousarray(arr, dtype="<f4").tobytes()
        entries.append({"name": name, "shape": list(arr.shape), "offset": offset, "nbytes": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    manifest = {
        "epoch": gan.epoch,
        "step": gan.step,
        "config": gan.config.to_dict(),
        "discriminator": gan.d_spec.to_dict(),
        "generator": gan.g_spec.to_dict(),
        "optimizer": {"d": _opt_meta(gan.opt_d), "g": _opt_meta(gan.opt_g)},
        "rng_state": gan.rng.bit_generator.state,
        "tensors": entries,
    }
    text = json.dumps(manifest, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(_PREFIX.pack(MAGIC, VERSION, len(text)))
        fh.write(text)
        for raw in chunks:
            fh.write(raw)


def load_checkpoint(path: str | Path) -> Checkpoint:
    raw = Path(path).read_bytes()
    if len(raw) < _PREFIX.size:
        raise CheckpointError(f"{path}: file too short for a checkpoint header")
    magic, version, mlen = _PREFIX.unpack_from(raw)
    if magic != MAGIC:
        raise CheckpointError(f"{path}: bad magic {magic!r}")
    if version != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint version {version}")
    start = _PREFIX.size + mlen
    if len(raw) < start:
        raise CheckpointError(f"{path}: manifest truncated")
    try:
        manifest = json.loads(raw[_PREFIX.size:start].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise CheckpointError(f"{path}: unreadable manifest ({err})") from None
    blob = raw[start:]
    expected = 0
    tensors = {}
    for entry in manifest["tensors"]:
        shape = tuple(entry["shape"])
        nbytes = int(np.prod(shape, dtype=np.int64)) * 4
        if entry["offset"] != expected or entry["nbytes"] != nbytes:
            raise CheckpointError(f"{path}: manifest entry {entry['name']} does not tile the blob")
        expected += nbytes
        if expected > len(blob):
            raise CheckpointError(f"{path}: blob holds {len(blob)} bytes but the manifest needs {expected}")
        tensors[entry["name"]] = np.frombuffer(blob, dtype="<f4", count=nbytes // 4, offset=entry["offset"]).reshape(shape).astype(np.float32)
    if expected != len(blob):
        raise CheckpointError(f"{path}: blob size {len(blob)} does not match manifest total {expected}")
    return Checkpoint(manifest, tensors)


def restore_gan(ckpt: Checkpoint) -> ReelGAN:
    m = ckpt.manifest
    config = TrainConfig(**m["config"])
    d_spec = DiscriminatorSpec.from_dict(m["discriminator"])
    g_spec = GeneratorSpec.from_dict(m["generator"])
    scratch = np.random.default_rng(0)
    disc = Discriminator(d_spec, scratch)
    gen = Generator(g_spec, scratch)
    for prefix, net in (("d", disc), ("g", gen)):
        for name, p in net.named_parameters().items():
            p.data = _take(ckpt, f"{prefix}.{name}", p.data.shape).copy()
        for name, buf in net.named_buffers().items():
            buf[...] = _take(ckpt, f"{prefix}.{name}", buf.shape)
    opts = {}
    for prefix in ("d", "g"):
        meta = m["optimizer"][prefix]
        opt = nn.AdamState(lr=meta["lr"], beta1=meta["beta1"], beta2=meta["beta2"], eps=meta["eps"], step=meta["step"])
        tag = f"opt.{prefix}.m."
        for key in ckpt.tensors:
            if key.startswith(tag):
                name = key[len(tag):]
                opt.m[name] = ckpt.tensors[key].copy()
                opt.v[name] = ckpt.tensors[f"opt.{prefix}.v.{name}"].copy()
        opts[prefix] = opt
    rng = np.random.default_rng()
    rng.bit_generator.state = m["rng_state"]
    return ReelGAN(d_spec, g_spec, disc, gen, opts["d"], opts["g"], rng, m["epoch"], m["step"], config)


def _take(ckpt: Checkpoint, name: str, shape) -> np.ndarray:
    if name not in ckpt.tensors:
        raise CheckpointError(f"checkpoint is missing tensor {name}")
    arr = ckpt.tensors[name]
    if arr.shape != tuple(shape):
        raise CheckpointError(f"{name}: stored shape {arr.shape}, model expects {tuple(shape)}")
    return arr


def sample(ckpt: Checkpoint | ReelGAN, n: int, seed: int) -> np.ndarray:
    """Draw ``n`` grids from the generator in inference mode."""
    gan = ckpt if isinstance(ckpt, ReelGAN) else restore_gan(ckpt)
    if n == 0:
        return np.zeros((0, 4, 64))
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n, gan.g_spec.latent_dim))
    out = gan.generator(z, train=False).data
    return np.asarray(out, dtype=np.float64).reshape(n, 4, 64)


def latest_checkpoint(directory: str | Path) -> Path | None:
    found = sorted(Path(directory).glob("ckpt_epoch*.rgan"))
    return found[-1] if found else None
