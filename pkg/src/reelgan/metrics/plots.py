"""Static SVG figures for evaluation runs."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .frechet import PHRASE_PAIRS  # noqa: E402

# fixed salt and no date keep SVG bytes stable across runs
plt.rcParams["svg.hashsalt"] = "reelgan"
_SVG_META = {"Date": None}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_profiles(profiles: dict, path: str | Path):
    """Grouped bars: one group per phrase pair, one bar per distribution."""
    labels = list(profiles)
    fig, ax = plt.subplots(figsize=(7, 3.5))
    width = 0.8 / max(len(labels), 1)
    x = np.arange(len(PHRASE_PAIRS))
    for k, label in enumerate(labels):
        values = [profiles[label].normalized[p] for p in PHRASE_PAIRS]
        ax.bar(x + k * width, values, width, label=label)
    ax.set_xticks(x + width * (len(labels) - 1) / 2)
    ax.set_xticklabels([f"{a}-{b}" for a, b in PHRASE_PAIRS])
    ax.set_xlabel("phrase pair")
    ax.set_ylabel("normalised mean Fréchet distance")
    ax.legend()
    _save(fig, path)


def plot_histograms(histograms: dict, path: str | Path):
    labels = list(histograms)
    pitches = sorted({p for h in histograms.values() for p in h})
    fig, ax = plt.subplots(figsize=(7, 3.5))
    width = 0.8 / max(len(labels), 1)
    x = np.arange(len(pitches))
    for k, label in enumerate(labels):
        h = histograms[label]
        total = sum(h.values()) or 1
        ax.bar(x + k * width, [h.get(p, 0) / total for p in pitches], width, label=label)
    ax.set_xticks(x + width * (len(labels) - 1) / 2)
    ax.set_xticklabels([str(p) for p in pitches], fontsize=7)
    ax.set_xlabel("MIDI pitch")
    ax.set_ylabel("frequency")
    ax.legend()
    _save(fig, path)


def plot_embedding(embedding: np.ndarray, labels: list[str], path: str | Path):
    fig, ax = plt.subplots(figsize=(5, 5))
    labels = np.asarray(labels)
    for label in dict.fromkeys(labels.tolist()):
        pts = embedding[labels == label]
        ax.scatter(pts[:, 0], pts[:, 1], s=6, label=label)
    ax.set_xticks([])
    ax.set_yticks([])
    ax.legend()
    _save(fig, path)
