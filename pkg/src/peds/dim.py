"""Cuboid discriminative-mining ensemble.

Epochs on the 6x9 electrode grid are tiled into local cuboids: 3x3 spatial
blocks crossed with consecutive 20 ms windows.  Each cuboid carries a
regularized linear discriminant; cuboids are ranked by validation balanced
accuracy and the top Q predictions are combined, together with a global
logistic submodel over the decimated epoch, into a normalized weighted sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import GRID_COLS, GRID_ROWS, ChannelLayout, EpochSet

BLOCK = 3
WINDOW_MS = 20.0
GLOBAL_DECIMATION = 8


class DimError(ValueError):
    """Degenerate input for the cuboid ensemble."""


@dataclass(frozen=True)
class CuboidModel:
    block: tuple[int, int]        # top-left grid cell of the 3x3 block
    t_start: int                  # first sample of the 20 ms window
    t_len: int
    weights: np.ndarray           # discriminant over flattened cuboid values
    bias: float
    validation_ba: float


@dataclass(frozen=True)
class GlobalSubmodel:
    weights: np.ndarray
    bias: float
    validation_ba: float


@dataclass(frozen=True)
class CuboidEnsemble:
    cuboids: tuple[CuboidModel, ...]
    cuboid_weights: np.ndarray
    global_submodel: GlobalSubmodel
    global_weight: float
    channel_order: tuple[int, ...]   # epoch rows feeding the grid, row-major
    n_channels: int
    n_samples: int

    def __post_init__(self):
        w = np.asarray(self.cuboid_weights, dtype=float)
        total = w.sum() + self.global_weight
        if w.size and (w < -1e-12).any():
            raise DimError("negative cuboid weight")
        if abs(total - 1.0) > 1e-9:
            raise DimError(f"weights sum to {total}, expected 1")
        w.flags.writeable = False
        object.__setattr__(self, "cuboid_weights", w)


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-np.clip(z, -500, 500)))


def _balanced_accuracy(y_true: np.ndarray, y_pred: np.ndarray) -> float:
    pos = y_true == 1
    neg = ~pos
    tpr = (y_pred[pos] == 1).mean() if pos.any() else np.nan
    tnr = (y_pred[neg] == 0).mean() if neg.any() else np.nan
    return float(0.5 * (tpr + tnr))

def _fit_lda(x: np.ndarray, y01: np.ndarray, shrink: float = 1e-1) -> tuple[np.ndarray, float]:
    """Regularized LDA returning (weights, bias) of a logistic-style score."""
    x0, x1 = x[y01 == 0], x[y01 == 1]
    mu0, mu1 = x0.mean(axis=0), x1.mean(axis=0)
    centered = np.concatenate([x0 - mu0, x1 - mu1], axis=0)
    cov = centered.T @ centered / max(len(x) - 2, 1)
    lam = shrink * np.trace(cov) / cov.shape[0] + 1e-12
    cov_r = cov + lam * np.eye(cov.shape[0])
    w = np.linalg.solve(cov_r, mu1 - mu0)
    prior = np.log(max(len(x1), 1) / max(len(x0), 1))
    b = -0.5 * float(w @ (mu0 + mu1)) + prior
    return w, b


def _fit_logistic(x: np.ndarray, y01: np.ndarray, l2: float = 1e-2,
                  iters: int = 200, lr: float = 0.5) -> tuple[np.ndarray, float]:
    """Small deterministic full-batch logistic regression."""
    scale = np.abs(x).max() + 1e-12
    xs = x / scale
    w = np.zeros(x.shape[1])
    b = 0.0
    n = len(xs)
    for _ in range(iters):
        p = _sigmoid(xs @ w + b)
        g = p - y01
        gw = xs.T @ g / n + l2 * w
        gb = g.mean()
        w -= lr * gw
        b -= lr * gb
    return w / scale, float(b)


def _grid_blocks() -> list[tuple[int, int]]:
    return [(r, c) for r in range(0, GRID_ROWS, BLOCK) for c in range(0, GRID_COLS, BLOCK)]


def _channel_order(layout: ChannelLayout) -> list[int]:
    grid_map = layout.grid_to_channel()
    if (grid_map < 0).any():
        raise DimError("layout does not define the full 6x9 grid")
    return [int(grid_map[r, c]) for r in range(GRID_ROWS) for c in range(GRID_COLS)]


def _cuboid_features(grid_data: np.ndarray, block: tuple[int, int],
                     t_start: int, t_len: int) -> np.ndarray:
    r, c = block
    cub = grid_data[:, r:r + BLOCK, c:c + BLOCK, t_start:t_start + t_len]
    return cub.reshape(len(grid_data), -1)


def dim_fit(epochs, binary_labels, layout: ChannelLayout, q: int = 60,
            seed: int = 0, sample_rate: float = 250.0,
            val_fraction: float = 0.25) -> CuboidEnsemble:
    """Fit the cuboid ensemble.

    ``epochs`` may be an EpochSet or an (n, channels, time) array whose
    channel rows follow ``layout``.  An internal stratified validation
    split (by ``seed``) ranks cuboids; kept cuboids and the global submodel
    are weighted by (validation BA - 0.5), clipped at zero and normalized.
    """
    if isinstance(epochs, EpochSet):
        sample_rate = epochs.sample_rate
        epochs = epochs.data_array()
    x = np.asarray(epochs, dtype=float)
    y = np.asarray(binary_labels).astype(int)
    if np.unique(y).size != 2:
        raise DimError("need both classes to fit the ensemble")
    y01 = (y == y.max()).astype(int)

    order = _channel_order(layout)
    n, _, t_total = x.shape
    grid = x[:, order, :].reshape(n, GRID_ROWS, GRID_COLS, t_total)

    t_len = int(round(WINDOW_MS * sample_rate / 1000.0))
    n_windows = t_total // t_len
    blocks = _grid_blocks()

    rng = np.random.default_rng(seed)
    val_idx_parts = []
    for cls in (0, 1):
        members = np.where(y01 == cls)[0]
        members = members[rng.permutation(members.size)]
        k = max(1, int(round(val_fraction * members.size)))
        val_idx_parts.append(members[:k])
    val_idx = np.sort(np.concatenate(val_idx_parts))
    fit_idx = np.setdiff1d(np.arange(n), val_idx)
    if np.unique(y01[fit_idx]).size < 2:
        raise DimError("validation split left a single-class training set")

    candidates: list[CuboidModel] = []
    for block in blocks:
        for w_i in range(n_windows):
            t0 = w_i * t_len
            feats = _cuboid_features(grid, block, t0, t_len)
            w, b = _fit_lda(feats[fit_idx], y01[fit_idx])
            pred = (_sigmoid(feats[val_idx] @ w + b) >= 0.5).astype(int)
            ba = _balanced_accuracy(y01[val_idx], pred)
            candidates.append(CuboidModel(block=block, t_start=t0, t_len=t_len,
                                          weights=w, bias=b, validation_ba=ba))

    candidates.sort(key=lambda c: (-c.validation_ba, c.t_start, c.block))
    kept = tuple(candidates[:min(q, len(candidates))])

    flat_global = grid[:, :, :, ::GLOBAL_DECIMATION].reshape(n, -1)
    gw, gb = _fit_logistic(flat_global[fit_idx], y01[fit_idx])
    gpred = (_sigmoid(flat_global[val_idx] @ gw + gb) >= 0.5).astype(int)
    gba = _balanced_accuracy(y01[val_idx], gpred)
    global_model = GlobalSubmodel(weights=gw, bias=gb, validation_ba=gba)

    raw = np.array([max(c.validation_ba - 0.5, 0.0) for c in kept])
    graw = max(gba - 0.5, 0.0)
    total = raw.sum() + graw
    if total <= 0:
        # Nothing beats chance on validation; fall back to the global model.
        raw = np.zeros(len(kept))
        graw = 1.0
        total = 1.0
    return CuboidEnsemble(cuboids=kept, cuboid_weights=raw / total,
                          global_submodel=global_model, global_weight=graw / total,
                          channel_order=tuple(order), n_channels=x.shape[1],
                          n_samples=t_total)


def dim_predict(ensemble: CuboidEnsemble, epoch: np.ndarray) -> float:
    """Weighted probability that the epoch belongs to the positive class."""
    return float(dim_predict_set(ensemble, epoch[None, :, :])[0])


def dim_predict_set(ensemble: CuboidEnsemble, epochs) -> np.ndarray:
    if isinstance(epochs, EpochSet):
        epochs = epochs.data_array()
    x = np.asarray(epochs, dtype=float)
    if x.shape[1:] != (ensemble.n_channels, ensemble.n_samples):
        raise DimError(f"epoch shape {x.shape[1:]} does not match training shape "
                       f"({ensemble.n_channels}, {ensemble.n_samples})")
    n = len(x)
    grid = x[:, list(ensemble.channel_order), :].reshape(n, GRID_ROWS, GRID_COLS, -1)
    out = np.zeros(n)
    for cub, w in zip(ensemble.cuboids, ensemble.cuboid_weights):
        if w == 0.0:
            continue
        feats = _cuboid_features(grid, cub.block, cub.t_start, cub.t_len)
        out += w * _sigmoid(feats @ cub.weights + cub.bias)
    flat_global = grid[:, :, :, ::GLOBAL_DECIMATION].reshape(n, -1)
    gm = ensemble.global_submodel
    out += ensemble.global_weight * _sigmoid(flat_global @ gm.weights + gm.bias)
    return out
