"""Input distances between windows of the observed process.

Two options are provided: the Mahalanobis distance between local histogram
means (noise resilient, invariant to linear maps of histogram space) and the
Fisher-Rao geodesic between zero-mean Gaussians fitted to each window.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg
from scipy.spatial.distance import pdist, squareform

from dig.core_data import LocalStats

KINDS = ("mahalanobis", "gaussian-geodesic", "information", "embedded-euclidean")


@dataclass
class DistanceMatrix:
    d: np.ndarray
    kind: str = "information"

    def __post_init__(self):
        d = np.asarray(self.d, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise ValueError(f"distance matrix must be square, got shape {d.shape}")
        if self.kind not in KINDS:
            raise ValueError(f"unknown distance kind {self.kind!r}")
        self.d = d

    @property
    def n(self) -> int:
        return self.d.shape[0]

    def validate(self, tol: float = 1e-10) -> "DistanceMatrix":
        d = self.d
        if not np.all(np.isfinite(d)):
            raise ValueError("distance matrix has non-finite entries")
        if np.any(d < 0):
            raise ValueError("distance matrix has negative entries")
        if np.any(np.diag(d) != 0):
            raise ValueError("distance matrix has a nonzero diagonal")
        if np.max(np.abs(d - d.T), initial=0.0) > tol:
            raise ValueError("distance matrix is not symmetric")
        return self


def finalize(d2: np.ndarray) -> np.ndarray:
    """Squared distances to a clean distance matrix (symmetric, zero diagonal)."""
    d = np.sqrt(np.maximum(d2, 0.0))
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return d


def pairwise_euclidean(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float).reshape(len(x), -1)
    return squareform(pdist(x, "euclidean"))


def _pinv_quadratic(diffs: np.ndarray, covs: np.ndarray, rank_tol: float) -> np.ndarray:
    """``diff^T pinv(cov) diff`` for stacks of vectors and symmetric matrices."""
    w, v = np.linalg.eigh(covs)
    cutoff = rank_tol * np.max(w, axis=-1, keepdims=True)
    keep = w > np.maximum(cutoff, 0.0)
    inv_w = np.where(keep, 1.0 / np.where(keep, w, 1.0), 0.0)
    proj = np.einsum("kij,ki->kj", v, diffs)
    return np.sum(proj * proj * inv_w, axis=-1)


def _pinv_quadratic_lowrank(diffs: np.ndarray, factors: np.ndarray, rank_tol: float) -> np.ndarray:
    """Same quadratic form for ``cov = F^T F`` computed through the small Gram matrix ``F F^T``.

    ``F F^T`` and ``F^T F`` share their nonzero eigenvalues ``w``; with ``F F^T = U W U^T``
    the quadratic form is ``sum_k (u_k^T F diff)^2 / w_k^2``.
    """
    gram = factors @ np.swapaxes(factors, 1, 2)
    w, u = np.linalg.eigh(0.5 * (gram + np.swapaxes(gram, 1, 2)))
    cutoff = rank_tol * np.max(w, axis=-1, keepdims=True)
    keep = w > np.maximum(cutoff, 0.0)
    inv_w2 = np.where(keep, 1.0 / np.where(keep, w, 1.0) ** 2, 0.0)
    fd = np.einsum("kij,kj->ki", factors, diffs)
    proj = np.einsum("kij,ki->kj", u, fd)
    return np.sum(proj * proj * inv_w2, axis=-1)


def mahalanobis_distance_matrix(stats: Sequence[LocalStats], rank_tol: float = 1e-10,
                                return_squared: bool = False):
    """Pairwise ``(E_t - E_s)^T (C_t + C_s)^+ (E_t - E_s)`` over local histogram stats.

    The pseudoinverse drops eigenvalues below ``rank_tol * lambda_max``; the
    difference component outside the range of ``C_t + C_s`` is ignored. When
    every ``LocalStats`` carries its deviation factor and the factors are
    thin, the same form is evaluated through the small Gram matrix.

    If ``return_squared`` the raw (unclamped) squared distances are returned
    alongside the matrix.
    """
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    if len(stats) < 2:
        raise ValueError("need at least two windows")
    dim = stats[0].mean_hist.shape[0]
    for s in stats:
        if s.mean_hist.shape != (dim,) or s.cov.shape != (dim, dim):
            raise ValueError("LocalStats dimension mismatch")
        if not (np.all(np.isfinite(s.mean_hist)) and np.all(np.isfinite(s.cov))):
            raise ValueError(f"non-finite stats at window {s.window_index}")
    means = np.stack([s.mean_hist for s in stats])
    n = len(stats)
    d2 = np.zeros((n, n))
    lowrank = all(s.factor is not None and s.factor.shape[1:] == (dim,) for s in stats)
    rows = max(s.factor.shape[0] for s in stats) if lowrank else 0
    if lowrank and 2 * rows < dim:
        # zero rows leave F^T F unchanged, so boundary windows pad to a common shape
        factors = np.zeros((n, rows, dim))
        for i, s in enumerate(stats):
            factors[i, :len(s.factor)] = s.factor
        for t in range(n - 1):
            rest = factors[t + 1:]
            stacked = np.concatenate([np.broadcast_to(factors[t], rest.shape), rest], axis=1)
            d2[t, t + 1:] = _pinv_quadratic_lowrank(means[t] - means[t + 1:], stacked, rank_tol)
    else:
        covs = np.stack([s.cov for s in stats])
        for t in range(n - 1):
            diffs = means[t] - means[t + 1:]
            d2[t, t + 1:] = _pinv_quadratic(diffs, covs[t] + covs[t + 1:], rank_tol)
    d2 = d2 + d2.T
    dm = DistanceMatrix(finalize(d2), "mahalanobis")
    if return_squared:
        return dm, d2
    return dm


@dataclass
class GaussianWindowStats:
    mean: np.ndarray
    cov: np.ndarray


def window_gaussian_stats(window: np.ndarray) -> GaussianWindowStats:
    w = np.asarray(window, dtype=float)
    w = w.reshape(len(w), -1)
    if len(w) < 2:
        raise ValueError("window needs at least two samples")
    mean = w.mean(axis=0)
    dev = w - mean
    cov = dev.T @ dev / (len(w) - 1)
    return GaussianWindowStats(mean, 0.5 * (cov + cov.T))


def regularized_cov(cov: np.ndarray, eps: float = 1e-8) -> np.ndarray:
    c = cov.shape[0]
    return cov + eps * np.trace(cov) / c * np.eye(c)


def gaussian_geodesic(cov_t: np.ndarray, cov_s: np.ndarray) -> float:
    """``sqrt(1/2 sum ln^2 lambda_i)`` with ``lambda`` the roots of ``|cov_t - lambda cov_s| = 0``."""
    try:
        lam = scipy.linalg.eigh(cov_t, cov_s, eigvals_only=True)
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is singular after regularization") from exc
    if np.any(lam <= 0):
        raise ValueError("non-positive generalized eigenvalue; covariance is not PSD")
    return float(np.sqrt(0.5 * np.sum(np.log(lam) ** 2)))


def gaussian_geodesic_matrix(windows: Sequence[np.ndarray], mode: str = "log-squared",
                             eps_reg: float = 1e-8) -> DistanceMatrix:
    if mode != "log-squared":
        raise ValueError(f"unsupported mode {mode!r}")
    covs = []
    c = None
    for i, w in enumerate(windows):
        w = np.asarray(w, dtype=float).reshape(len(w), -1)
        if c is None:
            c = w.shape[1]
        elif w.shape[1] != c:
            raise ValueError("windows have differing channel counts")
        if len(w) < c + 1:
            raise ValueError(f"window {i} has {len(w)} samples, need at least {c + 1}")
        cov = regularized_cov(window_gaussian_stats(w).cov, eps_reg)
        if np.trace(cov) <= 0:
            raise ValueError(f"window {i} covariance is singular after regularization")
        covs.append(cov)
    covs = np.stack(covs)
    try:
        whiten = np.linalg.inv(np.linalg.cholesky(covs))
    except np.linalg.LinAlgError as exc:
        raise ValueError("covariance is singular after regularization") from exc
    n = len(covs)
    d = np.zeros((n, n))
    for t in range(n - 1):
        # eigenvalues of W_s cov_t W_s^T are the generalized eigenvalues of (cov_t, cov_s)
        m = whiten[t + 1:] @ covs[t] @ np.swapaxes(whiten[t + 1:], 1, 2)
        lam = np.linalg.eigvalsh(0.5 * (m + np.swapaxes(m, 1, 2)))
        if np.any(lam <= 0):
            raise ValueError("non-positive generalized eigenvalue; covariance is not PSD")
        d[t, t + 1:] = np.sqrt(0.5 * np.sum(np.log(lam) ** 2, axis=1))
    return DistanceMatrix(d + d.T, "gaussian-geodesic")
