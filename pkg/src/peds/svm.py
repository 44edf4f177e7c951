"""Linear soft-margin SVM trained by deterministic subgradient descent,
with Platt-scaled probability output."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class SvmError(ValueError):
    """Degenerate training input."""


@dataclass(frozen=True)
class SvmModel:
    weights: np.ndarray
    bias: float
    platt_a: float
    platt_b: float
    regularization: float

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if not np.isfinite(w).all() or not np.isfinite([self.bias, self.platt_a,
                                                        self.platt_b]).all():
            raise SvmError("non-finite model parameters")
        w.flags.writeable = False
        object.__setattr__(self, "weights", w)

    def decision(self, features: np.ndarray) -> np.ndarray:
        features = np.atleast_2d(np.asarray(features, dtype=float))
        if features.shape[1] != self.weights.size:
            raise SvmError(f"feature length {features.shape[1]} does not match "
                           f"model dimension {self.weights.size}")
        return features @ self.weights + self.bias


def _fit_platt(scores: np.ndarray, labels01: np.ndarray,
               max_iter: int = 200) -> tuple[float, float]:
    """Sigmoid calibration sigma(a*s + b) by Newton descent on the NLL.

    Uses Platt's smoothed targets; the slope is kept positive so the
    probability stays monotone in the decision score.
    """
    n_pos = int(labels01.sum())
    n_neg = labels01.size - n_pos
    t = np.where(labels01 == 1, (n_pos + 1.0) / (n_pos + 2.0), 1.0 / (n_neg + 2.0))
    a, b = 1.0, 0.0
    for _ in range(max_iter):
        z = np.clip(a * scores + b, -500, 500)
        p = 1.0 / (1.0 + np.exp(-z))
        g = p - t
        grad = np.array([(g * scores).sum(), g.sum()])
        if np.abs(grad).max() < 1e-10:
            break
        w = np.maximum(p * (1.0 - p), 1e-12)
        h11 = (w * scores * scores).sum() + 1e-12
        h12 = (w * scores).sum()
        h22 = w.sum() + 1e-12
        det = h11 * h22 - h12 * h12
        if det < 1e-10 * h11 * h22 or scores.std() < 1e-12:
            # Degenerate (near-constant) scores: calibrate the bias alone so
            # the output matches the class prior.
            tbar = float(np.clip(t.mean(), 1e-9, 1 - 1e-9))
            b = float(np.log(tbar / (1.0 - tbar)) - a * scores.mean())
            break
        da = (h22 * grad[0] - h12 * grad[1]) / det
        db = (h11 * grad[1] - h12 * grad[0]) / det
        a, b = a - da, b - db
    if a <= 0:
        # Held-out scores anti-correlated with labels; keep the contract
        # that probability increases with the score.
        a = 1e-6
    return float(a), float(b)


def svm_fit(features: np.ndarray, binary_labels: np.ndarray, lam: float = 1e-2,
            epochs_sgd: int = 500, seed: int = 0, platt_holdout: float = 0.2) -> SvmModel:
    """Minimize hinge loss + lam * ||w||^2 by full-batch subgradient descent.

    A held-out fraction of the training set (split by ``seed``) calibrates
    the Platt sigmoid so probabilities are not optimistically scaled.
    """
    x = np.asarray(features, dtype=float)
    labels = np.asarray(binary_labels)
    if x.ndim != 2:
        raise SvmError(f"features must be 2-D, got shape {x.shape}")
    classes = np.unique(labels)
    if classes.size != 2:
        raise SvmError(f"need two classes, got {classes.tolist()}")
    if min((labels == c).sum() for c in classes) < 2:
        raise SvmError("need at least 2 samples per class")
    if np.allclose(x, x[0]):
        raise SvmError("all feature rows identical; nothing to separate")
    y = np.where(labels == classes.max(), 1.0, -1.0)

    rng = np.random.default_rng(seed)
    order = rng.permutation(x.shape[0])
    n_hold = max(2, int(round(platt_holdout * x.shape[0])))
    hold, fit_idx = order[:n_hold], order[n_hold:]
    # Keep both classes on each side of the calibration split.
    if np.unique(y[fit_idx]).size < 2 or np.unique(y[hold]).size < 2:
        hold, fit_idx = order, order
    xf, yf = x[fit_idx], y[fit_idx]

    w = np.zeros(x.shape[1])
    b = 0.0
    n = xf.shape[0]
    for t in range(1, epochs_sgd + 1):
        margins = yf * (xf @ w + b)
        violators = margins < 1.0
        grad_w = 2.0 * lam * w - (yf[violators, None] * xf[violators]).sum(axis=0) / n
        grad_b = -yf[violators].sum() / n
        eta = 1.0 / (2.0 * lam * t + 1.0)
        w -= eta * grad_w
        b -= eta * grad_b

    hold_scores = x[hold] @ w + b
    hold_y01 = (y[hold] > 0).astype(float)
    a, pb = _fit_platt(hold_scores, hold_y01)
    return SvmModel(weights=w, bias=float(b), platt_a=a, platt_b=pb,
                    regularization=float(lam))


def svm_predict_proba(model: SvmModel, features: np.ndarray) -> np.ndarray:
    """Calibrated probability of the positive class, in (0, 1)."""
    score = model.decision(features)
    z = np.clip(model.platt_a * score + model.platt_b, -500, 500)
    p = 1.0 / (1.0 + np.exp(-z))
    return np.clip(p, 1e-15, 1.0 - 1e-15)


def svm_predict(model: SvmModel, features: np.ndarray) -> np.ndarray:
    return (svm_predict_proba(model, features) >= 0.5).astype(int)
