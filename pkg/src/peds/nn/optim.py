"""Adam optimizer with freeze support and max-norm projection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .tensor import Tensor


@dataclass
class TrainConfig:
    """Optimization settings shared by the training loops."""

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 32
    max_epochs: int = 100
    patience: int = 10
    class_weights: tuple[float, float] = (1.0, 1.0)
    seed: int = 0

    def __post_init__(self):
        if self.learning_rate <= 0 or self.batch_size <= 0 or self.max_epochs <= 0:
            raise ValueError("rates, batch size and epoch budget must be positive")
        if any(w <= 0 for w in self.class_weights):
            raise ValueError("class weights must be positive")


def apply_max_norm(param: Tensor) -> None:
    """Rescale weight columns whose L2 norm exceeds the parameter's cap."""
    if param.max_norm is None:
        return
    norms = np.sqrt((param.data**2).sum(axis=0, keepdims=True))
    scale = np.minimum(1.0, param.max_norm / np.maximum(norms, 1e-300))
    param.data *= scale


class Adam:
    """Standard Adam with bias correction; frozen parameters never move."""

    def __init__(self, params: list[Tensor], config: TrainConfig):
        self.params = list(params)
        self.config = config
        self.t = 0
        self.m = [np.zeros_like(p.data) for p in self.params]
        self.v = [np.zeros_like(p.data) for p in self.params]

    def zero_grad(self) -> None:
        for p in self.params:
            p.grad = None

    def step(self) -> None:
        cfg = self.config
        self.t += 1
        bc1 = 1.0 - cfg.beta1**self.t
        bc2 = 1.0 - cfg.beta2**self.t
        for i, p in enumerate(self.params):
            if p.frozen or p.grad is None:
                continue
            g = p.grad
            self.m[i] = cfg.beta1 * self.m[i] + (1.0 - cfg.beta1) * g
            self.v[i] = cfg.beta2 * self.v[i] + (1.0 - cfg.beta2) * g * g
            m_hat = self.m[i] / bc1
            v_hat = self.v[i] / bc2
            p.data -= cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.eps)
            apply_max_norm(p)


def adam_step(params: list[Tensor], optimizer: Adam) -> None:
    """Single update over parameters whose gradients are populated."""
    optimizer.step()
