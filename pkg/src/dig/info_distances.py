"""Information distances between rows of a diffused operator.

Rows of ``P^t`` are the ``t``-step transition distributions of each point.
The gamma family interpolates between the diffusion distance (gamma = -1),
a Hellinger-type distance (gamma = 0) and the log "potential" distance
(gamma = 1). The multinomial Fisher-Rao geodesic is provided separately.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.spatial.distance import pdist, squareform

from dig.distances import DistanceMatrix

FISHER_RAO = "fisher-rao"


@dataclass(frozen=True)
class InfoDistanceSpec:
    gamma: Union[float, str] = 1.0
    log_floor: float = 1e-12

    def __post_init__(self):
        if self.gamma != FISHER_RAO:
            if not -1.0 <= float(self.gamma) <= 1.0:
                raise ValueError(f"gamma must lie in [-1, 1], got {self.gamma}")
        if not 0 < self.log_floor <= 1e-3:
            raise ValueError(f"log_floor must lie in (0, 1e-3], got {self.log_floor}")

    @property
    def label(self) -> str:
        return FISHER_RAO if self.gamma == FISHER_RAO else f"gamma={float(self.gamma):g}"


def _weighted_dists(features: np.ndarray, weights: np.ndarray) -> np.ndarray:
    """``sqrt(sum_m w_m (f_im - f_jm)^2)`` for all row pairs, from explicit differences."""
    scaled = features * np.sqrt(weights)[None, :]
    d = squareform(pdist(scaled, "euclidean"))
    np.fill_diagonal(d, 0.0)
    return d


def gamma_features(Pt: np.ndarray, gamma: float, log_floor: float = 1e-12) -> np.ndarray:
    """Row transform whose ``1/phi0``-weighted Euclidean distance is ``D^gamma``."""
    Pt = np.asarray(Pt, dtype=float)
    if gamma == 1:
        return np.log(np.maximum(Pt, log_floor))
    if gamma == -1:
        return Pt
    expo = (1.0 - gamma) / 2.0
    return np.sqrt(2.0 / (1.0 - gamma)) * np.maximum(Pt, 0.0) ** expo


def _check_operator(Pt: np.ndarray) -> np.ndarray:
    Pt = np.asarray(Pt, dtype=float)
    if Pt.ndim != 2:
        raise ValueError("operator must be a matrix")
    if np.any(Pt < -1e-12) or np.max(np.abs(Pt.sum(axis=1) - 1)) > 1e-8:
        raise ValueError("operator is not row-stochastic")
    return Pt


def gamma_distance_matrix(Pt: np.ndarray, phi0: np.ndarray, spec: InfoDistanceSpec) -> DistanceMatrix:
    if spec.gamma == FISHER_RAO:
        return fisher_rao_matrix(Pt)
    Pt = _check_operator(Pt)
    phi0 = np.asarray(phi0, dtype=float)
    if phi0.shape != (Pt.shape[1],):
        raise ValueError("stationary distribution length does not match the operator")
    if np.any(phi0 <= 0):
        raise ValueError("stationary distribution has non-positive entries")
    gamma = float(spec.gamma)
    f = gamma_features(Pt, gamma, spec.log_floor)
    return DistanceMatrix(_weighted_dists(f, 1.0 / phi0), "information")


def fisher_rao_matrix(Pt: np.ndarray) -> DistanceMatrix:
    """``2 arccos(sum_m sqrt(p_im p_jm))`` between rows, in ``[0, pi]``."""
    Pt = _check_operator(Pt)
    root = np.sqrt(np.maximum(Pt, 0.0))
    bc = np.clip(root @ root.T, 0.0, 1.0)
    d = 2.0 * np.arccos(bc)
    d = 0.5 * (d + d.T)
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(d, "information")
