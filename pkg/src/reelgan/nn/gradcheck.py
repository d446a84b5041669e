"""Central finite-difference checks for the reverse-mode graph."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .ops import freeze_kinks, record_kinks


@dataclass
class ParamCheck:
    name: str
    max_rel_error: float
    max_abs_error: float
    checked: int
    crossed: int  # elements whose free +/- eps probes would switch a relu branch


@dataclass
class GradCheckReport:
    tolerance: float
    params: list[ParamCheck] = field(default_factory=list)

    @property
    def max_rel_error(self) -> float:
        return max((p.max_rel_error for p in self.params), default=0.0)

    @property
    def passed(self) -> bool:
        return all(p.checked > 0 for p in self.params) and self.max_rel_error < self.tolerance

    def summary(self) -> str:
        lines = [
            f"{p.name}: rel={p.max_rel_error:.2e} abs={p.max_abs_error:.2e} checked={p.checked} crossed={p.crossed}"
            for p in self.params
        ]
        return "\n".join(lines)


def _relative(a, b, floor):
    return np.abs(a - b) / np.maximum(np.maximum(np.abs(a), np.abs(b)), floor)


def _probe(loss_fn, masks):
    with record_kinks() as free:
        loss_fn()
    crossed = not (len(free) == len(masks) and all(np.array_equal(x, y) for x, y in zip(free, masks)))
    with freeze_kinks(masks):
        value = float(loss_fn().data)
    return value, crossed


def grad_check(loss_fn, params: dict, eps=1e-3, tol=1e-4, floor=1e-6, max_elements=None, seed=0) -> GradCheckReport:
    """Compare backward() gradients of ``loss_fn()`` with central differences.

    ``loss_fn`` must rebuild the graph on every call. Probes are evaluated
    with every relu-type activation held on the linear piece it occupies at
    the unperturbed point, which is the function backward() differentiates;
    without this a probe that crosses a kink measures a blend of two slopes.
    Crossings are still counted in the report. ``max_elements`` samples a
    seeded subset of each parameter.
    """
    for p in params.values():
        p.zero_grad()
    with record_kinks() as base:
        loss = loss_fn()
    masks = [k.copy() for k in base]
    loss.backward()
    analytic = {name: np.array(p.grad if p.grad is not None else np.zeros(p.data.shape)) for name, p in params.items()}
    rng = np.random.default_rng(seed)
    report = GradCheckReport(tolerance=tol)
    for name, p in params.items():
        flat = p.data.reshape(-1)
        indices = np.arange(flat.size)
        if max_elements is not None and flat.size > max_elements:
            indices = np.sort(rng.choice(flat.size, size=max_elements, replace=False))
        numeric, crossed = [], 0
        for idx in indices:
            orig = flat[idx]
            flat[idx] = orig + eps
            f_plus, c_plus = _probe(loss_fn, masks)
            flat[idx] = orig - eps
            f_minus, c_minus = _probe(loss_fn, masks)
            flat[idx] = orig
            crossed += c_plus or c_minus
            numeric.append((f_plus - f_minus) / (2 * eps))
        numeric = np.asarray(numeric)
        exact = analytic[name].reshape(-1)[indices]
        rel = float(np.max(_relative(exact, numeric, floor))) if numeric.size else 0.0
        abs_err = float(np.max(np.abs(exact - numeric))) if numeric.size else 0.0
        report.params.append(ParamCheck(name, rel, abs_err, int(numeric.size), crossed))
    return report


def directional_check(loss_fn, params: dict, eps=1e-3, seed=0) -> float:
    """Relative error between <grad, r> and the finite-difference slope along r."""
    rng = np.random.default_rng(seed)
    for p in params.values():
        p.zero_grad()
    with record_kinks() as base:
        loss = loss_fn()
    masks = [k.copy() for k in base]
    loss.backward()
    directions = {name: rng.standard_normal(p.data.shape) for name, p in params.items()}
    predicted = sum(float(np.sum(p.grad * directions[name])) for name, p in params.items() if p.grad is not None)
    originals = {name: p.data.copy() for name, p in params.items()}
    for name, p in params.items():
        p.data = originals[name] + eps * directions[name]
    f_plus, _ = _probe(loss_fn, masks)
    for name, p in params.items():
        p.data = originals[name] - eps * directions[name]
    f_minus, _ = _probe(loss_fn, masks)
    for name, p in params.items():
        p.data = originals[name]
    numeric = (f_plus - f_minus) / (2 * eps)
    return abs(predicted - numeric) / max(abs(predicted), abs(numeric), 1e-12)
