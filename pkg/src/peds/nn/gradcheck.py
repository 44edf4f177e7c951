"""Finite-difference verification of backpropagated gradients."""

from __future__ import annotations

from typing import Callable

import numpy as np

from .tensor import Tensor


def finite_diff_gradcheck(loss_fn: Callable[[], Tensor], params: list[Tensor],
                          h: float = 1e-5, max_elements: int | None = None
                          ) -> float:
    """Largest relative error between backprop and central differences.

    ``loss_fn`` must rebuild the scalar loss deterministically from the
    current parameter values (stochastic layers disabled).  Relative error
    is ``|g_bp - g_fd| / max(1e-8, |g_bp| + |g_fd|)`` per element; when
    ``max_elements`` is set, a deterministic stride subsamples large
    parameters.
    """
    for p in params:
        p.grad = None
    loss = loss_fn()
    loss.backward()
    analytic = [np.array(p.grad if p.grad is not None else np.zeros_like(p.data))
                for p in params]

    worst = 0.0
    for p, g_bp in zip(params, analytic):
        flat = p.data.reshape(-1)
        g_flat = g_bp.reshape(-1)
        n = flat.size
        if max_elements is not None and n > max_elements:
            idx = np.linspace(0, n - 1, max_elements).astype(int)
        else:
            idx = np.arange(n)
        for i in idx:
            orig = flat[i]
            flat[i] = orig + h
            up = float(loss_fn().data)
            flat[i] = orig - h
            down = float(loss_fn().data)
            flat[i] = orig
            g_fd = (up - down) / (2.0 * h)
            err = abs(g_flat[i] - g_fd) / max(1e-8, abs(g_flat[i]) + abs(g_fd))
            worst = max(worst, err)
    return worst
