"""Weighted binary categorical cross-entropy."""

from __future__ import annotations

import numpy as np

from .tensor import Tensor, as_tensor, clip, log, tsum

PROB_FLOOR = 1e-12


def one_hot(labels: np.ndarray, n_classes: int = 2) -> np.ndarray:
    labels = np.asarray(labels, dtype=int)
    out = np.zeros((labels.size, n_classes))
    out[np.arange(labels.size), labels] = 1.0
    return out


def wbce_loss(probabilities: Tensor, labels_onehot: np.ndarray,
              class_weights=(1.0, 1.0)) -> Tensor:
    """Mean over instances of ``-sum_i w_i * y_i * log(p_i)``.

    Predictions are clamped to [1e-12, 1 - 1e-12] before the logarithm.
    With unit weights this is plain categorical cross-entropy.
    """
    probs = as_tensor(probabilities)
    y = np.asarray(labels_onehot, dtype=float)
    if probs.data.shape != y.shape:
        raise ValueError(f"probabilities {probs.data.shape} vs labels {y.shape}")
    w = np.asarray(class_weights, dtype=float)
    if w.shape != (y.shape[1],):
        raise ValueError(f"{y.shape[1]} classes need {y.shape[1]} class weights")
    n = y.shape[0]
    clamped = clip(probs, PROB_FLOOR, 1.0 - PROB_FLOOR)
    weighted = log(clamped) * (y * w[None, :])
    return tsum(weighted) * (-1.0 / n)
