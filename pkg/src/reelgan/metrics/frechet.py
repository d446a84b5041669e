from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from ..grid import check_grid

PHRASE_PAIRS = tuple(combinations(range(1, 5), 2))


def discrete_frechet(a, b) -> float:
    """Discrete Fréchet distance between two scalar sequences (O(m*n) DP)."""
    a = np.asarray(a, dtype=np.float64).reshape(-1)
    b = np.asarray(b, dtype=np.float64).reshape(-1)
    if a.size == 0 or b.size == 0:
        raise ValueError("discrete_frechet needs non-empty sequences")
    d = np.abs(a[:, None] - b[None, :]).tolist()
    m, n = a.size, b.size
    prev = [0.0] * n
    row = d[0]
    acc = row[0]
    for j in range(n):
        acc = max(acc, row[j])
        prev[j] = acc
    for i in range(1, m):
        row = d[i]
        cur = [0.0] * n
        cur[0] = max(prev[0], row[0])
        for j in range(1, n):
            best = min(prev[j], prev[j - 1], cur[j - 1])
            cur[j] = row[j] if row[j] > best else best
        prev = cur
    return float(prev[n - 1])


def phrase_profile(grid) -> dict[tuple[int, int], float]:
    """Fréchet distance between every pair of phrase rows (1-based pairs)."""
    g = check_grid(grid)
    return {(i, j): discrete_frechet(g[i - 1], g[j - 1]) for i, j in PHRASE_PAIRS}


@dataclass(frozen=True)
class DistributionProfile:
    means: dict[tuple[int, int], float]
    normalized: dict[tuple[int, int], float]
    n_tunes: int
    normalization: str = "max"


def normalize_profile(means: dict, method: str = "max") -> dict:
    values = np.array([means[p] for p in PHRASE_PAIRS])
    if method == "max":
        scale = values.max()
    elif method == "sum":
        scale = values.sum()
    else:
        raise ValueError(f"unknown normalisation {method!r}")
    if scale == 0:
        return {p: 0.0 for p in PHRASE_PAIRS}
    return {p: float(means[p] / scale) for p in PHRASE_PAIRS}


def distribution_profile(grids, method: str = "max", profiles=None) -> DistributionProfile:
    """Mean phrase profile over a corpus plus its normalised form.

    ``profiles`` may carry precomputed per-grid profiles (e.g. computed in
    worker processes) in the same order as ``grids``.
    """
    if profiles is None:
        profiles = [phrase_profile(g) for g in grids]
    if not profiles:
        raise ValueError("distribution_profile needs at least one grid")
    means = {p: float(np.mean([prof[p] for prof in profiles])) for p in PHRASE_PAIRS}
    return DistributionProfile(means, normalize_profile(means, method), len(profiles), method)
