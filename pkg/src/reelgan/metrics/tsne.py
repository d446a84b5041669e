"""Exact O(N^2) t-SNE with per-point perplexity calibration."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TsneConfig:
    perplexity: float = 50.0
    n_components: int = 2
    iterations: int = 1000
    learning_rate: float = 200.0
    exaggeration: float = 12.0
    exaggeration_iters: int = 250
    momentum_initial: float = 0.5
    momentum_final: float = 0.8
    momentum_switch: int = 250
    entropy_tol: float = 1e-5  # bits
    max_bisection: int = 64
    init_std: float = 1e-4
    min_gain: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.iterations < 1:
            raise ValueError("iterations must be at least 1")
        if self.perplexity <= 1:
            raise ValueError("perplexity must exceed 1")


@dataclass
class TsneResult:
    embedding: np.ndarray
    kl: np.ndarray  # KL(P || Q) before each update, against the unexaggerated P
    entropies: np.ndarray  # conditional entropies in bits after calibration
    betas: np.ndarray  # precisions 1 / (2 sigma^2)


def squared_distances(x: np.ndarray) -> np.ndarray:
    sq = np.sum(x * x, axis=1)
    d = sq[:, None] + sq[None, :] - 2.0 * (x @ x.T)
    np.maximum(d, 0.0, out=d)
    np.fill_diagonal(d, 0.0)
    return d


def _row_entropy(dist_row: np.ndarray, beta: float) -> tuple[float, np.ndarray]:
    shifted = dist_row - dist_row.min()
    w = np.exp(-beta * shifted)
    total = w.sum()
    p = w / total
    # H in nats; shifting by the row minimum leaves p unchanged
    h = np.log(total) + beta * np.sum(shifted * p)
    return h / np.log(2.0), p


def conditional_probabilities(x, perplexity: float, tol: float = 1e-5, max_steps: int = 64):
    """Row-stochastic P(j|i) with each row's entropy within ``tol`` bits of log2(perplexity).

    Returns (P, entropies_bits, betas).
    """
    dist = squared_distances(np.asarray(x, dtype=np.float64))
    n = dist.shape[0]
    target = np.log2(perplexity)
    P = np.zeros((n, n))
    entropies = np.zeros(n)
    betas = np.zeros(n)
    for i in range(n):
        row = np.delete(dist[i], i)
        spread = row.mean() - row.min()
        beta = 1.0 / spread if spread > 0 else 1.0
        lo, hi = 0.0, np.inf
        h, p = _row_entropy(row, beta)
        for _ in range(max_steps):
            if abs(h - target) < tol:
                break
            if h > target:
                lo = beta
                beta = beta * 2.0 if hi == np.inf else 0.5 * (beta + hi)
            else:
                hi = beta
                beta = 0.5 * (beta + lo)
            h, p = _row_entropy(row, beta)
        P[i, np.arange(n) != i] = p
        entropies[i] = h
        betas[i] = beta
    return P, entropies, betas


def joint_probabilities(P_cond: np.ndarray) -> np.ndarray:
    n = P_cond.shape[0]
    P = (P_cond + P_cond.T) / (2.0 * n)
    return np.maximum(P, 1e-12) * (1 - np.eye(n))


def _kl(P, Q):
    mask = P > 0
    return float(np.sum(P[mask] * np.log(P[mask] / Q[mask])))


def tsne_embed(points, config: TsneConfig = TsneConfig()) -> TsneResult:
    x = np.asarray(points, dtype=np.float64)
    if x.ndim != 2:
        raise ValueError("tsne_embed expects an (N, D) array")
    n = x.shape[0]
    if not np.all(np.isfinite(x)):
        raise ValueError("tsne_embed: input contains non-finite values")
    if n < 3 * config.perplexity:
        raise ValueError(f"perplexity {config.perplexity} is too large for {n} points (need N >= 3 * perplexity)")
    P_cond, entropies, betas = conditional_probabilities(x, config.perplexity, config.entropy_tol, config.max_bisection)
    P = joint_probabilities(P_cond)

    rng = np.random.default_rng(config.seed)
    y = rng.normal(0.0, config.init_std, size=(n, config.n_components))
    velocity = np.zeros_like(y)
    gains = np.ones_like(y)
    kl = np.zeros(config.iterations)
    off_diag = 1 - np.eye(n)
    for it in range(config.iterations):
        exaggerate = it < config.exaggeration_iters
        momentum = config.momentum_initial if it < config.momentum_switch else config.momentum_final
        num = off_diag / (1.0 + squared_distances(y))
        Q = np.maximum(num / num.sum(), 1e-12)
        kl[it] = _kl(P, Q)
        PQ = (P * config.exaggeration if exaggerate else P) - Q
        W = PQ * num
        grad = 4.0 * (np.sum(W, axis=1)[:, None] * y - W @ y)
        same_sign = (grad > 0) == (velocity > 0)
        gains = np.where(same_sign, gains * 0.8, gains + 0.2)
        np.maximum(gains, config.min_gain, out=gains)
        velocity = momentum * velocity - config.learning_rate * gains * grad
        y = y + velocity
        y = y - y.mean(axis=0)
    return TsneResult(y, kl, entropies, betas)
