"""Gradient clipping and the Adadelta optimizer."""

from __future__ import annotations

import math

import numpy as np


def global_norm(grads):
    """L2 norm over the concatenation of all gradient arrays."""
    total = 0.0
    for g in grads.values():
        total += float(np.sum(np.asarray(g, dtype=np.float64) ** 2))
    return math.sqrt(total)


def clip_global_norm(grads, max_norm=1.0):
    """Scale all gradients in place so their global L2 norm <= max_norm."""
    if max_norm <= 0:
        raise ValueError("clip_global_norm: max_norm must be positive")
    norm = global_norm(grads)
    if norm > max_norm:
        scale = max_norm / norm
        for g in grads.values():
            g *= scale
    return grads


class AdadeltaState:
    """Per-parameter running averages of squared gradients and updates."""

    def __init__(self, rho=0.95, epsilon=1e-6):
        if not 0.0 < rho < 1.0:
            raise ValueError("AdadeltaState: rho must be in (0, 1)")
        if epsilon <= 0:
            raise ValueError("AdadeltaState: epsilon must be positive")
        self.rho = rho
        self.epsilon = epsilon
        self.acc_grad = {}
        self.acc_update = {}

    def _ensure(self, name, like):
        if name not in self.acc_grad:
            self.acc_grad[name] = np.zeros_like(like, dtype=np.float64)
            self.acc_update[name] = np.zeros_like(like, dtype=np.float64)


def adadelta_step(params, grads, state):
    """One Adadelta update, mutating params in place.

    params: mapping name -> Tensor; grads: mapping name -> ndarray.
    Accumulators run in float64 regardless of parameter precision.
    """
    rho, eps = state.rho, state.epsilon
    for name, grad in grads.items():
        p = params[name]
        if p.data.shape != np.shape(grad):
            raise ValueError(
                f"adadelta_step: gradient shape {np.shape(grad)} does not "
                f"match parameter {name} {p.data.shape}")
        g = np.asarray(grad, dtype=np.float64)
        state._ensure(name, p.data)
        eg = state.acc_grad[name]
        ex = state.acc_update[name]
        eg *= rho
        eg += (1.0 - rho) * g * g
        delta = -np.sqrt((ex + eps) / (eg + eps)) * g
        ex *= rho
        ex += (1.0 - rho) * delta * delta
        p.data = (p.data.astype(np.float64) + delta).astype(p.data.dtype)
    return params
