"""Low-dimensional embeddings of distance matrices.

Classical (Torgerson) MDS provides the initialisation; metric MDS refines it
with SMACOF, which minimises the raw stress ``sum_{i<j} (D_ij - |x_i - x_j|)^2``
by iterating the Guttman transform. The diffusion-map embedding is the
eigendecomposition baseline.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist, squareform

from dig.distances import DistanceMatrix
from dig.info_distances import InfoDistanceSpec, gamma_distance_matrix

METHODS = ("classical-mds", "metric-mds", "diffusion-map")


@dataclass
class Embedding:
    coords: np.ndarray
    stress: float
    method: str
    m: int
    stress_history: list = field(default_factory=list)
    n_iter: int = 0

    def distances(self) -> DistanceMatrix:
        return DistanceMatrix(squareform(pdist(self.coords)), "embedded-euclidean")


def _as_array(D) -> np.ndarray:
    return D.d if isinstance(D, DistanceMatrix) else np.asarray(D, dtype=float)


def _fix_signs(vecs: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive."""
    idx = np.argmax(np.abs(vecs), axis=0)
    signs = np.sign(vecs[idx, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    return vecs * signs


def _raw_stress(d_upper: np.ndarray, coords: np.ndarray) -> float:
    r = d_upper - pdist(coords)
    return float(r @ r)


def stress(D, coords: np.ndarray) -> float:
    """Normalised stress ``sqrt(sum (D_ij - |x_i - x_j|)^2 / sum D_ij^2)`` over ``i < j``."""
    d = _as_array(D)
    coords = np.asarray(coords, dtype=float).reshape(d.shape[0], -1)
    du = squareform(d, checks=False)
    denom = float(du @ du)
    if denom == 0:
        raise ValueError("stress is undefined for an all-zero distance matrix")
    return float(np.sqrt(_raw_stress(du, coords) / denom))


def classical_mds(D, m: int = 2) -> Embedding:
    d = _as_array(D)
    n = d.shape[0]
    if not 1 <= m <= n - 1:
        raise ValueError(f"m must be in [1, {n - 1}], got {m}")
    j = np.eye(n) - 1.0 / n
    b = -0.5 * j @ (d * d) @ j
    b = 0.5 * (b + b.T)
    w, v = np.linalg.eigh(b)
    order = np.argsort(w)[::-1][:m]
    w, v = w[order], _fix_signs(v[:, order])
    if np.all(w <= 0):
        raise ValueError("degenerate geometry: no positive eigenvalue among the top m")
    coords = v * np.sqrt(np.maximum(w, 0.0))
    coords -= coords.mean(axis=0)
    return Embedding(coords, stress(d, coords), "classical-mds", m)


def guttman_transform(d: np.ndarray, coords: np.ndarray) -> np.ndarray:
    """One SMACOF step with unit weights: ``X <- B(X) X / N``."""
    n = d.shape[0]
    delta = squareform(pdist(coords))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.where(delta > 0, d / delta, 0.0)
    b = -ratio
    np.fill_diagonal(b, 0.0)
    np.fill_diagonal(b, -b.sum(axis=1))
    return b @ coords / n


def metric_mds(D, init: Embedding, m: Optional[int] = None, tol: float = 1e-6,
               max_iter: int = 500, check_monotone: bool = False) -> Embedding:
    """SMACOF from ``init``; stops when the relative decrease of raw stress drops below ``tol``.

    ``stress_history`` holds the normalised stress before the first step and
    after every step. With ``check_monotone`` an increase beyond round-off
    raises ``RuntimeError``.
    """
    d = _as_array(D)
    x = np.array(init.coords, dtype=float)
    m = x.shape[1] if m is None else m
    if x.shape != (d.shape[0], m):
        raise ValueError(f"init has shape {x.shape}, expected {(d.shape[0], m)}")
    if tol <= 0:
        raise ValueError("tol must be positive")
    du = squareform(d, checks=False)
    denom = float(du @ du)
    if denom == 0:
        raise ValueError("stress is undefined for an all-zero distance matrix")
    x -= x.mean(axis=0)
    raw = _raw_stress(du, x)
    history = [np.sqrt(raw / denom)]
    it = 0
    while it < max_iter and raw > 0:
        x_new = guttman_transform(d, x)
        if not np.all(np.isfinite(x_new)):
            raise FloatingPointError(f"non-finite coordinates at SMACOF iteration {it + 1}")
        raw_new = _raw_stress(du, x_new)
        it += 1
        if check_monotone and raw_new > raw + 1e-12 * max(1.0, raw):
            raise RuntimeError(f"stress increased at iteration {it}: {raw} -> {raw_new}")
        history.append(np.sqrt(raw_new / denom))
        decrease = (raw - raw_new) / raw
        x, raw = x_new, raw_new
        if decrease < tol:
            break
    return Embedding(x, float(np.sqrt(raw / denom)), "metric-mds", m, history, it)


def diffusion_map_embedding(P: np.ndarray, t: int, m: int = 2,
                            stationary: Optional[np.ndarray] = None,
                            imag_tol: float = 1e-8) -> Embedding:
    """Coordinates ``lambda_l^t psi_l(i)``, ``l = 1..m``, skipping the constant eigenvector.

    Right eigenvectors are normalised so that ``sum_i phi0_i psi_l(i)^2 = 1``;
    with this scaling Euclidean distances over the full spectrum equal the
    diffusion distance.
    """
    P = np.asarray(P, dtype=float)
    n = P.shape[0]
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    if not 1 <= m <= n - 1:
        raise ValueError(f"m must be in [1, {n - 1}], got {m}")
    if stationary is None:
        lam, left = np.linalg.eig(P.T)
        if np.max(np.abs(lam.imag)) > imag_tol:
            raise ValueError("operator has non-real eigenvalues")
        phi0 = np.abs(left[:, np.argmax(lam.real)].real)
        phi0 = phi0 / phi0.sum()
    else:
        phi0 = np.asarray(stationary, dtype=float)
    r = np.sqrt(phi0)
    a = r[:, None] * P / r[None, :]
    asym = np.max(np.abs(a - a.T))
    if asym > imag_tol:
        raise ValueError(f"operator is not reversible (asymmetry {asym:.3g}); eigenvalues may be complex")
    w, v = np.linalg.eigh(0.5 * (a + a.T))
    order = np.argsort(w)[::-1]
    w, v = w[order], v[:, order]
    psi = _fix_signs(v[:, 1:m + 1]) / r[:, None]
    coords = psi * w[1:m + 1] ** t
    ref = gamma_distance_matrix(np.linalg.matrix_power(P, t), phi0, InfoDistanceSpec(-1.0))
    return Embedding(coords, stress(ref, coords), "diffusion-map", m)
