"""Finite-difference gradient verification.

Run under precision(np.float64); central differences against the analytic
backward pass, relative error with denominator max(|a|, |n|, 1e-8).
"""

from __future__ import annotations

import numpy as np

from .tensor import ConfigError, ShapeError, Tensor, default_dtype


def _require_f64():
    if default_dtype() != np.float64:
        raise ConfigError("grad_check must run in 64-bit mode; "
                          "wrap the call in precision(np.float64)")


def _rel_err(analytic, numeric):
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), 1e-8)


def grad_check(f, at: Tensor, eps: float = 1e-4, sample=None, rng=None) -> float:
    """Max relative error between analytic and central-difference gradients.

    `f` maps `at` to a scalar Tensor. `sample` optionally limits the number
    of coordinates checked (uniformly sampled with `rng`).
    """
    _require_f64()
    at.requires_grad = True
    out = f(at)
    if out.data.size != 1:
        raise ShapeError(f"grad_check requires scalar f, got shape {out.shape}")
    out.backward()
    analytic = at.grad.copy()
    coords = np.arange(at.size)
    if sample is not None and sample < at.size:
        rng = rng or np.random.default_rng(0)
        coords = rng.choice(at.size, size=sample, replace=False)
    flat = at.data.reshape(-1)
    worst = 0.0
    for i in coords:
        keep = flat[i]
        flat[i] = keep + eps
        hi = float(f(at).data)
        flat[i] = keep - eps
        lo = float(f(at).data)
        flat[i] = keep
        numeric = (hi - lo) / (2.0 * eps)
        worst = max(worst, _rel_err(float(analytic.reshape(-1)[i]), numeric))
    return worst


def grad_check_multi(f, tensors, eps: float = 1e-4,
                     samples_per_tensor: int = 8, rng=None) -> float:
    """grad_check over many parameter tensors sharing one scalar function.

    `f` takes no arguments and rebuilds the graph from the tensors' current
    data. One analytic backward pass; finite differences on a sampled subset
    of each tensor's coordinates.
    """
    _require_f64()
    rng = rng or np.random.default_rng(0)
    for t in tensors:
        t.requires_grad = True
        t.grad = None
    out = f()
    if out.data.size != 1:
        raise ShapeError("grad_check_multi requires scalar f")
    out.backward()
    analytic = {id(t): (t.grad.copy() if t.grad is not None
                        else np.zeros_like(t.data)) for t in tensors}
    worst = 0.0
    for t in tensors:
        coords = np.arange(t.size)
        if samples_per_tensor < t.size:
            coords = rng.choice(t.size, size=samples_per_tensor, replace=False)
        flat = t.data.reshape(-1)
        for i in coords:
            keep = flat[i]
            flat[i] = keep + eps
            hi = float(f().data)
            flat[i] = keep - eps
            lo = float(f().data)
            flat[i] = keep
            numeric = (hi - lo) / (2.0 * eps)
            worst = max(worst, _rel_err(float(analytic[id(t)].reshape(-1)[i]),
                                        numeric))
    return worst
