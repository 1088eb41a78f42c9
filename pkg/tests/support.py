"""Shared generators for tests."""

import numpy as np

from dig.diffusion import build_diffusion
from dig.distances import pairwise_euclidean


def point_cloud(seed, n=40, dim=3):
    return np.random.default_rng(seed).normal(size=(n, dim))


def random_model(seed, n=40, k=5, alpha=2.0, dim=3):
    """Diffusion model on a random Gaussian point cloud; connected for these k and alpha."""
    return build_diffusion(pairwise_euclidean(point_cloud(seed, n, dim)), k=k, alpha=alpha)


def random_positive_kernel(seed, n=10):
    a = np.random.default_rng(seed).uniform(0.05, 1.0, size=(n, n))
    return 0.5 * (a + a.T)


def random_stochastic(seed, n=5, strict=True):
    rng = np.random.default_rng(seed)
    p = rng.uniform(0.05 if strict else 0.0, 1.0, size=(n, n))
    return p / p.sum(axis=1, keepdims=True)


def two_cluster_points(seed=0, per=20, gap=5.0):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(per, 2))
    b = rng.normal(size=(per, 2)) + [gap, 0.0]
    return np.vstack([a, b])


def procrustes_residual(x, y):
    """Residual norm after optimally rotating/reflecting and translating ``y`` onto ``x``."""
    x = x - x.mean(axis=0)
    y = y - y.mean(axis=0)
    u, _, vt = np.linalg.svd(y.T @ x)
    return float(np.linalg.norm(x - y @ (u @ vt)))
