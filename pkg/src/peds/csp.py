"""Common spatial patterns for binary epoch classification.

The spatial filters solve the generalized symmetric eigenproblem
``S1 w = lambda (S1 + S2) w`` by Cholesky whitening of the composite
covariance followed by a cyclic Jacobi eigendecomposition, so the whole
fit is deterministic and dependency-free.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EpochSet


class CspError(ValueError):
    """Degenerate input for CSP fitting or transformation."""


def symmetric_eigh_jacobi(a: np.ndarray, tol: float = 1e-12,
                          max_sweeps: int = 100) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns eigenvalues in descending order and the matching eigenvectors
    as columns.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"matrix must be square, got {a.shape}")
    v = np.eye(n)
    scale = max(np.abs(a).max(), 1e-300)
    for _ in range(max_sweeps):
        off = np.sqrt((a**2).sum() - (np.diag(a)**2).sum())
        if off <= tol * scale * n:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta**2 + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t**2 + 1.0)
                s = t * c
                rot_p = c * a[:, p] - s * a[:, q]
                rot_q = s * a[:, p] + c * a[:, q]
                a[:, p], a[:, q] = rot_p, rot_q
                rot_p = c * a[p, :] - s * a[q, :]
                rot_q = s * a[p, :] + c * a[q, :]
                a[p, :], a[q, :] = rot_p, rot_q
                rot_p = c * v[:, p] - s * v[:, q]
                rot_q = s * v[:, p] + c * v[:, q]
                v[:, p], v[:, q] = rot_p, rot_q
    evals = np.diag(a).copy()
    order = np.argsort(evals)[::-1]
    return evals[order], v[:, order]


def generalized_eig_descending(s1: np.ndarray, composite: np.ndarray
                               ) -> tuple[np.ndarray, np.ndarray]:
    """Solve ``s1 w = lambda * composite w`` with composite-orthonormal w.

    Whitening: with ``L L^T = composite``, the problem reduces to the
    ordinary symmetric eigenproblem of ``L^-1 s1 L^-T``; eigenvectors map
    back as ``w = L^-T v`` so that ``w_i^T composite w_j = delta_ij``.
    """
    try:
        chol = np.linalg.cholesky(composite)
    except np.linalg.LinAlgError as exc:
        raise CspError(f"composite covariance not positive definite: {exc}") from exc
    linv_s1 = np.linalg.solve(chol, s1)
    whitened = np.linalg.solve(chol, linv_s1.T).T
    whitened = 0.5 * (whitened + whitened.T)
    evals, vecs = symmetric_eigh_jacobi(whitened)
    filters = np.linalg.solve(chol.T, vecs)
    return evals, filters


@dataclass(frozen=True)
class CspModel:
    """Fitted spatial filters: rows of ``filters`` are the 2m kept filters,
    top-m then bottom-m generalized eigenvectors, eigenvalues descending."""

    filters: np.ndarray
    eigenvalues: np.ndarray
    m: int

    def __post_init__(self):
        f = np.asarray(self.filters, dtype=float)
        e = np.asarray(self.eigenvalues, dtype=float)
        f.flags.writeable = False
        e.flags.writeable = False
        object.__setattr__(self, "filters", f)
        object.__setattr__(self, "eigenvalues", e)


def epoch_covariance(data: np.ndarray) -> np.ndarray:
    """Trace-normalized covariance of one channels x time epoch."""
    cov = data @ data.T / data.shape[1]
    tr = np.trace(cov)
    if not tr > 0:
        raise CspError("epoch has zero total variance; covariance undefined")
    return cov / tr


def class_covariances(epochs: np.ndarray, labels: np.ndarray
                      ) -> tuple[np.ndarray, np.ndarray]:
    labels = np.asarray(labels)
    classes = np.unique(labels)
    if classes.size != 2:
        raise CspError(f"need exactly two classes, got {classes.tolist()}")
    covs = []
    for cls in classes[::-1]:  # positive class first
        members = epochs[labels == cls]
        covs.append(np.mean([epoch_covariance(e) for e in members], axis=0))
    return covs[0], covs[1]


def csp_fit(epochs, binary_labels, m: int = 3, ridge: float | None = None) -> CspModel:
    """Fit CSP filters from labeled epochs.

    Parameters
    ----------
    epochs : (n, channels, time) array or EpochSet
        Training epochs.
    binary_labels : (n,) array
        Two distinct label values; the larger one is treated as the
        positive class whose variance the leading filters maximize.
    m : int
        Filter pairs kept; the model holds 2m rows.
    ridge : float, optional
        Diagonal loading of the composite covariance.  Default
        ``1e-3 * trace / dim``; pass 0.0 to disable.
    """
    if isinstance(epochs, EpochSet):
        epochs = epochs.data_array()
    epochs = np.asarray(epochs, dtype=float)
    n_channels = epochs.shape[1]
    if not 0 < 2 * m <= n_channels:
        raise CspError(f"cannot keep {2 * m} filters with {n_channels} channels")
    s1, s2 = class_covariances(epochs, binary_labels)
    composite = s1 + s2
    lam = 1e-3 * np.trace(composite) / n_channels if ridge is None else float(ridge)
    composite = composite + lam * np.eye(n_channels)
    evals, filt = generalized_eig_descending(s1, composite)
    keep = list(range(m)) + list(range(n_channels - m, n_channels))
    return CspModel(filters=filt[:, keep].T, eigenvalues=evals[keep], m=m)


def csp_transform(model: CspModel, epoch: np.ndarray) -> np.ndarray:
    """Normalized log-variance features of one epoch under the model filters."""
    epoch = np.asarray(epoch, dtype=float)
    if epoch.shape[0] != model.filters.shape[1]:
        raise CspError(f"epoch has {epoch.shape[0]} channels, "
                       f"filters expect {model.filters.shape[1]}")
    projected = model.filters @ epoch
    var = projected.var(axis=1)
    total = var.sum()
    if not total > 0:
        raise CspError("zero-variance epoch cannot be transformed")
    return np.log(np.maximum(var / total, 1e-300))


def csp_transform_set(model: CspModel, epochs) -> np.ndarray:
    if isinstance(epochs, EpochSet):
        epochs = epochs.data_array()
    return np.stack([csp_transform(model, e) for e in np.asarray(epochs, dtype=float)])
