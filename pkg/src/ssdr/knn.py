"""Exact nearest-neighbor classification and neighborhood diagnostics."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .costs import CostMatrix, pairwise_sq_dists
from .dataset import Dataset


@dataclass(frozen=True)
class KnnIndex:
    points: np.ndarray      # (d, m) embedded labeled examples
    labels: np.ndarray      # (m,) class ids
    k: int = 1

    def __post_init__(self):
        if self.points.ndim != 2 or self.points.shape[1] == 0:
            raise ValueError("index needs a non-empty (d, m) point matrix")
        if not 1 <= self.k <= self.points.shape[1]:
            raise ValueError("k must satisfy 1 <= k <= m")


def _vote(labels_sorted: np.ndarray) -> int:
    """Majority vote; ties go to the class of the single nearest point."""
    ids, counts = np.unique(labels_sorted, return_counts=True)
    winners = ids[counts == counts.max()]
    if winners.size == 1:
        return int(winners[0])
    return int(labels_sorted[0])


def knn_classify(index: KnnIndex, z: np.ndarray) -> int | np.ndarray:
    """Classify one embedded point or a (d, m) batch.

    Distance ties are broken toward the smaller stored index.
    """
    z = np.asarray(z, dtype=float)
    single = z.ndim == 1
    Q = z[:, None] if single else z
    sq_p = (index.points**2).sum(axis=0)
    d2 = sq_p[None, :] + (Q**2).sum(axis=0)[:, None] - 2.0 * (Q.T @ index.points)
    m = index.points.shape[1]
    order_keys = np.arange(m)
    out = np.empty(Q.shape[1], dtype=int)
    for qi in range(Q.shape[1]):
        order = np.lexsort((order_keys, d2[qi]))
        out[qi] = _vote(index.labels[order[: index.k]])
    return int(out[0]) if single else out


def good_neighbors_score(dataset: Dataset, mapping=None) -> float:
    """Leave-one-out 1-NN accuracy with every label revealed.

    ``mapping`` optionally maps the (d0, n) inputs to another space (e.g.
    KPCA coordinates) before distances are taken.
    """
    if dataset.n < 2:
        raise ValueError("need at least two examples")
    if not dataset.labeled_mask.all():
        raise ValueError("the diagnostic needs full ground-truth labels")
    X = mapping(dataset.X) if mapping is not None else dataset.X
    d2 = pairwise_sq_dists(np.asarray(X, dtype=float))
    np.fill_diagonal(d2, np.inf)
    correct = 0
    for i in range(dataset.n):
        j = np.lexsort((np.arange(dataset.n), d2[i]))[0]
        correct += int(dataset.labels[i] == dataset.labels[j])
    return correct / dataset.n


def good_nearby_ratio(cu: CostMatrix | np.ndarray, labels: np.ndarray,
                      threshold: float) -> float:
    """Fraction of same-class pairs among pairs with c^u_ij > threshold."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    e = cu.dense() if isinstance(cu, CostMatrix) else np.asarray(cu)
    labels = np.asarray(labels)
    iu, ju = np.triu_indices(e.shape[0], k=1)
    near = e[iu, ju] > threshold
    total = int(near.sum())
    if total == 0:
        raise ValueError("no pair exceeds the threshold; ratio undefined")
    good = int((labels[iu[near]] == labels[ju[near]]).sum())
    return good / total
