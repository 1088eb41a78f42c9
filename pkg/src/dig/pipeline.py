"""Library-level DIG pipeline: series -> input distance -> diffusion -> information distance -> MDS."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from dig import core_data, diffusion, distances, info_distances, mds

log = logging.getLogger(__name__)


class StageError(RuntimeError):
    """An error raised inside a named pipeline stage."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause


class _stage:
    def __init__(self, name):
        self.name = name

    def __enter__(self):
        log.debug("stage %s", self.name)

    def __exit__(self, exc_type, exc, tb):
        if exc is not None and not isinstance(exc, StageError):
            raise StageError(self.name, exc) from exc
        return False


@dataclass
class InputDistanceResult:
    distance: distances.DistanceMatrix
    window_spec: core_data.WindowSpec
    labels: Optional[np.ndarray]
    centers: np.ndarray


def input_distance(series: core_data.MultivariateSeries, window: core_data.WindowSpec,
                   kind: str = "mahalanobis", n_bins: int = 20, l2: int = 10,
                   rank_tol: float = 1e-10, edges: Optional[list] = None) -> InputDistanceResult:
    """Step 1: windows of the series and their pairwise input distance."""
    with _stage("windowing"):
        wins = core_data.slice_windows(series, window)
        if len(wins) < 2:
            raise ValueError(f"need at least 2 windows, got {len(wins)}")
        labels = None
        if series.labels is not None:
            labels = core_data.window_labels(series.labels, window, series.n_samples)
        centers = window.centers(series.n_samples)
    if kind == "mahalanobis":
        with _stage("histograms"):
            mode = "explicit" if edges is not None else "global-minmax"
            hists = core_data.estimate_histograms(wins, n_bins, mode, edges=edges, series_values=series.values)
            stats = core_data.local_histogram_stats(hists, l2)
        with _stage("mahalanobis"):
            dist = distances.mahalanobis_distance_matrix(stats, rank_tol)
    elif kind == "gaussian-geodesic":
        with _stage("gaussian-geodesic"):
            dist = distances.gaussian_geodesic_matrix(wins)
    else:
        raise StageError("input-distance", ValueError(f"unknown input distance {kind!r}"))
    return InputDistanceResult(dist, window, labels, centers)


def diffusion_from_distance(D, k: int = 5, alpha: float = 10.0, t: Union[int, str] = "auto",
                            t_max: int = 64) -> diffusion.DiffusionModel:
    """Steps 2-4: kernel, operator, stationary distribution, entropy curve and time scale."""
    with _stage("kernel"):
        sigma = diffusion.adaptive_bandwidth(D, k)
        K = diffusion.alpha_decay_kernel(D, sigma, alpha)
    with _stage("operator"):
        P = diffusion.row_normalize(K)
        phi0 = diffusion.stationary_distribution(K)
    with _stage("time-scale"):
        H = diffusion.von_neumann_entropy_curve(P, t_max, stationary=phi0)
        t_sel = diffusion.select_time_scale(H) if t == "auto" else int(t)
        if t_sel < 1:
            raise ValueError(f"t must be >= 1, got {t_sel}")
    return diffusion.DiffusionModel(K, P, phi0, k, alpha, t_sel, H)


def information_distance(model: diffusion.DiffusionModel, variant, Pt: Optional[np.ndarray] = None,
                         log_floor: float = 1e-12) -> distances.DistanceMatrix:
    """Step 6 for one variant: a gamma value or ``'fisher-rao'``."""
    with _stage("information-distance"):
        if Pt is None:
            Pt = diffusion.diffuse(model.operator, model.t_selected)
        spec = info_distances.InfoDistanceSpec(variant, log_floor)
        return info_distances.gamma_distance_matrix(Pt, model.stationary, spec)


def embed_distance(D, m: int = 2, tol: float = 1e-6, max_iter: int = 500) -> mds.Embedding:
    """Steps 7-8: classical MDS initialisation refined by SMACOF."""
    with _stage("classical-mds"):
        init = mds.classical_mds(D, m)
    with _stage("metric-mds"):
        return mds.metric_mds(D, init, m, tol, max_iter)


def embed_variant(model: diffusion.DiffusionModel, variant, Pt: np.ndarray, m: int = 2,
                  tol: float = 1e-6, max_iter: int = 500):
    """Embedding for one variant; ``'dm'`` gives the diffusion-map baseline.

    Returns ``(embedding, information distance or None)``.
    """
    if variant == "dm":
        with _stage("diffusion-map"):
            return mds.diffusion_map_embedding(model.operator, model.t_selected, m, model.stationary), None
    D = information_distance(model, variant, Pt)
    return embed_distance(D, m, tol, max_iter), D


def dig(D, gamma=1.0, k: int = 5, alpha: float = 10.0, t: Union[int, str] = "auto", m: int = 2,
        tol: float = 1e-6, max_iter: int = 500):
    """Steps 2-8 on a precomputed input distance. Returns ``(embedding, model, info distance)``."""
    model = diffusion_from_distance(D, k, alpha, t)
    Pt = diffusion.diffuse(model.operator, model.t_selected)
    emb, info = embed_variant(model, gamma, Pt, m, tol, max_iter)
    return emb, model, info
