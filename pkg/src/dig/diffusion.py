"""Diffusion geometry on a distance matrix.

alpha-decay kernel with k-NN adaptive bandwidth, row-normalised diffusion
operator, stationary distribution, matrix powers and von Neumann entropy
based selection of the diffusion time.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from dig.distances import DistanceMatrix


@dataclass
class DiffusionModel:
    kernel: np.ndarray
    operator: np.ndarray
    stationary: np.ndarray
    k: int
    alpha: float
    t_selected: Optional[int] = None
    entropy: Optional[np.ndarray] = None

    @property
    def n(self) -> int:
        return self.kernel.shape[0]


def _as_array(d) -> np.ndarray:
    return d.d if isinstance(d, DistanceMatrix) else np.asarray(d, dtype=float)


def adaptive_bandwidth(D, k: int) -> np.ndarray:
    """Distance from each point to its ``k``-th nearest neighbour (self excluded)."""
    d = _as_array(D)
    n = d.shape[0]
    if not 1 <= k <= n - 1:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")
    off = d.copy()
    np.fill_diagonal(off, np.inf)
    sigma = np.partition(off, k - 1, axis=1)[:, k - 1]
    bad = np.flatnonzero(~(sigma > 0))
    if bad.size:
        raise ValueError(f"zero k-NN bandwidth at index {int(bad[0])} (duplicate points); increase k")
    return sigma


def alpha_decay_kernel(D, sigma: np.ndarray, alpha: float) -> np.ndarray:
    """``K_ij = 1/2 exp(-(D_ij^2/sigma_i)^alpha) + 1/2 exp(-(D_ij^2/sigma_j)^alpha)``."""
    d = _as_array(D)
    sigma = np.asarray(sigma, dtype=float)
    if alpha < 1:
        raise ValueError(f"alpha must be >= 1, got {alpha}")
    if np.any(sigma <= 0):
        raise ValueError("bandwidths must be positive")
    d2 = d * d
    k = 0.5 * np.exp(-(d2 / sigma[:, None]) ** alpha) + 0.5 * np.exp(-(d2 / sigma[None, :]) ** alpha)
    return 0.5 * (k + k.T)


def row_normalize(K: np.ndarray) -> np.ndarray:
    K = np.asarray(K, dtype=float)
    rows = K.sum(axis=1)
    bad = np.flatnonzero(~(rows > 0))
    if bad.size:
        raise ValueError(f"kernel row {int(bad[0])} sums to zero (disconnected point)")
    return K / rows[:, None]


def symmetric_conjugate(K: np.ndarray) -> np.ndarray:
    """``D^{-1/2} K D^{-1/2}``; shares its spectrum with ``P = D^{-1} K``."""
    dinv = 1.0 / np.sqrt(K.sum(axis=1))
    a = dinv[:, None] * K * dinv[None, :]
    return 0.5 * (a + a.T)


def check_connected(K: np.ndarray, gap: float = 1e-12) -> None:
    lam = np.linalg.eigvalsh(symmetric_conjugate(K))
    if len(lam) > 1 and lam[-2] >= 1 - gap:
        raise ValueError(f"kernel graph is disconnected (second eigenvalue {lam[-2]:.15g}); increase k")


def stationary_distribution(K: np.ndarray, check: bool = True) -> np.ndarray:
    """Stationary distribution of the walk on symmetric ``K``: degrees over volume."""
    K = np.asarray(K, dtype=float)
    if np.max(np.abs(K - K.T)) > 1e-12 * max(1.0, np.max(np.abs(K))):
        raise ValueError("kernel is not symmetric")
    if check:
        check_connected(K)
    deg = K.sum(axis=1)
    phi0 = deg / deg.sum()
    resid = np.max(np.abs(phi0 @ row_normalize(K) - phi0))
    if resid > 1e-10:
        raise ValueError(f"stationarity check failed (residual {resid:.3g})")
    return phi0


def diffuse(P: np.ndarray, t: int) -> np.ndarray:
    """``P**t`` by repeated squaring."""
    if t < 1:
        raise ValueError(f"t must be >= 1, got {t}")
    return np.linalg.matrix_power(np.asarray(P, dtype=float), int(t))


def spectrum_from_operator(P: np.ndarray, stationary: Optional[np.ndarray] = None,
                           imag_tol: float = 1e-8) -> np.ndarray:
    """Eigenvalues of a row-stochastic operator built from a symmetric kernel.

    With ``stationary`` given, the spectrum comes from the symmetric matrix
    ``S^{1/2} P S^{-1/2}`` (``S = diag(stationary)``) and is real by
    construction. Otherwise a general eigensolver is used and a spectrum with
    imaginary parts above ``imag_tol`` is rejected.
    """
    P = np.asarray(P, dtype=float)
    if stationary is not None:
        r = np.sqrt(np.asarray(stationary, dtype=float))
        a = r[:, None] * P / r[None, :]
        if np.max(np.abs(a - a.T)) > 1e-8:
            raise ValueError("operator is not reversible with respect to the given stationary distribution")
        return np.linalg.eigvalsh(0.5 * (a + a.T))
    lam = np.linalg.eigvals(P)
    if np.max(np.abs(lam.imag), initial=0.0) > imag_tol:
        raise ValueError("operator has non-real eigenvalues; kernel is not symmetric")
    return np.sort(lam.real)


def von_neumann_entropy_curve(P: np.ndarray, t_max: int = 64,
                              stationary: Optional[np.ndarray] = None) -> np.ndarray:
    """Entropy of the normalised ``|lambda|^t`` spectrum of ``P``, for ``t = 1..t_max``."""
    if t_max < 1:
        raise ValueError("t_max must be >= 1")
    lam = np.abs(spectrum_from_operator(P, stationary))
    lam = lam / lam.max()
    ts = np.arange(1, t_max + 1)
    powered = lam[None, :] ** ts[:, None]
    eta = powered / powered.sum(axis=1, keepdims=True)
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(eta > 0, eta * np.log(eta), 0.0)
    return -terms.sum(axis=1)


def select_time_scale(H, tie_tol: float = 1e-12) -> int:
    """Knee of the entropy curve, returned as a 1-based ``t``.

    The knee is the interior point farthest from the chord joining the first
    and last points of the curve. Near-ties go to the smaller ``t``.
    """
    H = np.asarray(H, dtype=float)
    if H.ndim != 1 or len(H) < 3:
        raise ValueError("entropy curve needs at least 3 points")
    if np.any(np.diff(H) > 1e-12):
        raise ValueError("entropy curve must be non-increasing")
    span = H[0] - H[-1]
    if not span > 0:
        raise ValueError("entropy curve is flat; pass an explicit t")
    t = np.arange(1, len(H) + 1, dtype=float)
    dx, dy = t[-1] - t[0], H[-1] - H[0]
    dist = np.abs(dy * (t - t[0]) - dx * (H - H[0])) / np.hypot(dx, dy)
    interior = dist[1:-1]
    best = interior.max()
    return int(np.flatnonzero(interior >= best - tie_tol * max(1.0, best))[0]) + 2


def build_diffusion(D, k: int = 5, alpha: float = 10.0) -> DiffusionModel:
    sigma = adaptive_bandwidth(D, k)
    K = alpha_decay_kernel(D, sigma, alpha)
    P = row_normalize(K)
    phi0 = stationary_distribution(K)
    return DiffusionModel(K, P, phi0, k, alpha)
