"""Embedding quality: Trustworthiness, the Mantel test and k-NN label accuracy."""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from dig.distances import DistanceMatrix


@dataclass
class MetricReport:
    trustworthiness: float
    mantel_r: float
    mantel_p: float
    k_used: int
    permutations: int
    seed: int

    def to_text(self) -> str:
        return "".join(f"{k}={v!r}\n" for k, v in asdict(self).items())


def _as_array(D) -> np.ndarray:
    return D.d if isinstance(D, DistanceMatrix) else np.asarray(D, dtype=float)


def _neighbor_order(d: np.ndarray) -> np.ndarray:
    """Row-wise neighbour ordering with self removed; ties go to the lower index."""
    n = d.shape[0]
    order = np.argsort(d, axis=1, kind="stable")
    return np.array([row[row != i] for i, row in enumerate(order)]).reshape(n, n - 1)


def trustworthiness(D_reference, D_embedded, k: int) -> float:
    """Kaski trustworthiness of ``D_embedded`` relative to ``D_reference``.

    ``1 - 2/(N k (2N - 3k - 1)) * sum_i sum_{j in U_k(i)} (r(i, j) - k)`` where
    ``U_k(i)`` are the embedded k-NN of ``i`` missing from its reference k-NN
    and ``r`` is the 1-based reference rank.
    """
    ref, emb = _as_array(D_reference), _as_array(D_embedded)
    n = ref.shape[0]
    if emb.shape != ref.shape:
        raise ValueError("distance matrices differ in size")
    if not 1 <= k < n / 2:
        raise ValueError(f"k must satisfy 1 <= k < N/2 = {n / 2}, got {k}")
    ref_order = _neighbor_order(ref)
    ranks = np.empty((n, n), dtype=int)
    rows = np.arange(n)[:, None]
    ranks[rows, ref_order] = np.arange(1, n)[None, :]
    emb_nn = _neighbor_order(emb)[:, :k]
    r = ranks[rows, emb_nn]
    penalty = np.sum(np.where(r > k, r - k, 0))
    return float(1.0 - 2.0 / (n * k * (2 * n - 3 * k - 1)) * penalty)


def _permutation(seed: int, i: int, n: int) -> np.ndarray:
    # one counter-keyed stream per permutation keeps results schedule independent
    return np.random.default_rng([seed, i]).permutation(n)


def mantel_test(D1, D2, permutations: int = 999, seed: int = 0):
    """Pearson r between the upper triangles, with a one-sided permutation p-value.

    Each permutation relabels rows and columns of ``D2`` together;
    ``p = (1 + #{r_perm >= r}) / (1 + permutations)``.
    """
    a, b = _as_array(D1), _as_array(D2)
    if a.shape != b.shape:
        raise ValueError("distance matrices differ in size")
    if permutations < 99:
        raise ValueError(f"need at least 99 permutations, got {permutations}")
    n = a.shape[0]
    iu = np.triu_indices(n, 1)
    x = a[iu]
    xc = x - x.mean()
    y = b[iu]
    if np.ptp(x) == 0 or np.ptp(y) == 0:
        raise ValueError("constant distance matrix has zero variance")
    xn = xc / np.linalg.norm(xc)

    def corr(yv):
        yc = yv - yv.mean()
        return float(np.clip(xn @ yc / np.linalg.norm(yc), -1.0, 1.0))

    r = corr(y)
    hits = 0
    for i in range(permutations):
        p = _permutation(seed, i, n)
        if corr(b[np.ix_(p, p)][iu]) >= r:
            hits += 1
    return r, (1 + hits) / (1 + permutations)


def knn_label_accuracy(D_embedded, labels, k: int = 5) -> float:
    """Leave-one-out k-NN vote; tied classes resolved by the smallest summed distance."""
    d = _as_array(D_embedded)
    labels = np.asarray(labels)
    n = d.shape[0]
    if len(labels) != n:
        raise ValueError("labels length does not match the distance matrix")
    if k < 1 or k > n - 1:
        raise ValueError(f"k must be in [1, {n - 1}], got {k}")
    if len(np.unique(labels)) < 2:
        raise ValueError("need at least two classes")
    nn = _neighbor_order(d)[:, :k]
    correct = 0
    for i in range(n):
        votes = {}
        for j in nn[i]:
            count, total = votes.get(labels[j], (0, 0.0))
            votes[labels[j]] = (count + 1, total + d[i, j])
        pred = min(votes.items(), key=lambda kv: (-kv[1][0], kv[1][1]))[0]
        correct += pred == labels[i]
    return correct / n


def evaluate(D_reference, D_embedded, k: int = 5, permutations: int = 999, seed: int = 0) -> MetricReport:
    tw = trustworthiness(D_reference, D_embedded, k)
    r, p = mantel_test(D_reference, D_embedded, permutations, seed)
    return MetricReport(tw, r, p, k, permutations, seed)
