from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class AdamState:
    lr: float = 2e-4
    beta1: float = 0.5
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: dict, grads: dict, state: AdamState) -> AdamState:
    """Bias-corrected Adam update applied in place to ``params[name].data``.

    Moments are kept in each parameter's storage dtype; the arithmetic runs
    in float64 and is rounded back once per step.
    """
    for name, p in params.items():
        g = grads.get(name)
        if g is not None and np.shape(g) != p.data.shape:
            raise ValueError(f"adam_step: gradient for {name} has shape {np.shape(g)}, expected {p.data.shape}")
    state.step += 1
    t = state.step
    c1 = 1.0 - state.beta1 ** t
    c2 = 1.0 - state.beta2 ** t
    for name, p in params.items():
        g = grads.get(name)
        if g is None:
            g = np.zeros(p.data.shape)
        dtype = p.data.dtype
        m = state.beta1 * state.m.get(name, 0.0) + (1.0 - state.beta1) * g
        v = state.beta2 * state.v.get(name, 0.0) + (1.0 - state.beta2) * np.square(g)
        m = np.asarray(m, dtype=dtype)
        v = np.asarray(v, dtype=dtype)
        state.m[name], state.v[name] = m, v
        update = state.lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
        p.data = (p.data - update).astype(dtype)
    return state
