"""Pairwise cost matrices built from label and neighborhood information.

Positive entries pull a pair of embedded points together, negative entries
push them apart.  Every constructor returns exactly symmetric matrices;
rows and columns touching an unlabeled example are zero in the label-based
matrices.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .dataset import UNLABELED


@dataclass(frozen=True)
class CostMatrix:
    """An n x n symmetric cost matrix with a provenance tag.

    ``entries`` is dense (ndarray) for the unlabel/combined matrices and
    may be a scipy sparse matrix for the binary neighbor graphs.
    """
    entries: np.ndarray | sp.spmatrix
    kind: str  # one of: intra, extra, label, unlabel, combined

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def dense(self) -> np.ndarray:
        e = self.entries
        return e.toarray() if sp.issparse(e) else np.asarray(e)


@dataclass(frozen=True)
class HeatKernelSpec:
    """Gaussian similarity scale: global sigma, or a local per-point scale
    taken from the distance to the k-th nearest neighbor."""
    scaling: str = "local"            # "global" | "local"
    sigma: float = 1.0                # global scale
    k: int = 7                        # neighbor rank for local scaling
    distance_floor: float | None = None   # local-scale clamp; default 1e-12 * diameter

    def __post_init__(self):
        if self.scaling not in ("global", "local"):
            raise ValueError(f"unknown scaling {self.scaling!r}")
        if self.scaling == "global" and self.sigma <= 0:
            raise ValueError("sigma must be positive")
        if self.scaling == "local" and self.k < 1:
            raise ValueError("neighbor rank k must be >= 1")


def pairwise_sq_dists(X: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances between the columns of X."""
    sq = (X * X).sum(axis=0)
    d2 = sq[:, None] + sq[None, :] - 2.0 * (X.T @ X)
    np.fill_diagonal(d2, 0.0)
    return np.maximum(d2, 0.0)


def _k_nearest(dists: np.ndarray, candidates: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k nearest candidates, ties broken by smallest index."""
    if candidates.size == 0:
        return candidates
    order = np.lexsort((candidates, dists[candidates]))
    return candidates[order[:k]]


def neighbor_graphs(X: np.ndarray, labels: np.ndarray, k: int,
                    dense_same_class: bool = False):
    """Binary same-class (C^I) and different-class (C^E) neighbor graphs.

    c^I_ij = 1 iff j is among the k nearest labeled same-class neighbors of
    i, or vice versa; C^E analogously over different classes.  Pairs with an
    unlabeled endpoint are zero.  With ``dense_same_class`` every labeled
    same-class pair gets c^I = 1 (the classical, non-local regime).
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    n = X.shape[1]
    labeled = np.flatnonzero(labels != UNLABELED)
    d2 = pairwise_sq_dists(X)
    ci = sp.lil_matrix((n, n))
    ce = sp.lil_matrix((n, n))
    for i in labeled:
        same = labeled[(labels[labeled] == labels[i]) & (labeled != i)]
        diff = labeled[labels[labeled] != labels[i]]
        same_nb = same if dense_same_class else _k_nearest(d2[i], same, k)
        for j in same_nb:
            ci[i, j] = 1.0
            ci[j, i] = 1.0
        for j in _k_nearest(d2[i], diff, k):
            ce[i, j] = 1.0
            ce[j, i] = 1.0
    return (CostMatrix(ci.tocsr(), "intra"), CostMatrix(ce.tocsr(), "extra"))


def cost_dne(ci: CostMatrix, ce: CostMatrix) -> CostMatrix:
    """Label cost of discriminant neighborhood embedding: C^I - C^E."""
    return CostMatrix((ci.entries - ce.entries).toarray(), "label")


def cost_mfa(ci: CostMatrix, ce: CostMatrix, X: np.ndarray):
    """Marginal Fisher analysis: C^l = -C^E, constraint from the
    same-class graph Laplacian scatter."""
    from .solver import laplacian_scatter
    cl = CostMatrix(-ce.entries.toarray(), "label")
    B = laplacian_scatter(X, ci)
    return cl, B


def lfda_costs(ci: CostMatrix, labels: np.ndarray, class_counts: np.ndarray,
               n_total: int | None = None):
    """Between/within cost matrices of local Fisher discriminant analysis.

    ``n_total`` is the n in the 1/n terms; defaults to the labeled count
    (the universe of the supervised derivation).
    """
    labels = np.asarray(labels)
    n = labels.shape[0]
    labeled = labels != UNLABELED
    if n_total is None:
        n_total = int(labeled.sum())
    ci_d = ci.dense()
    cbet = np.zeros((n, n))
    cwit = np.zeros((n, n))
    lab_i = labeled[:, None] & labeled[None, :]
    same = lab_i & (labels[:, None] == labels[None, :])
    diff = lab_i & ~same
    nk = np.where(labeled, class_counts[np.maximum(labels, 1) - 1], 1)
    inv_nk = 1.0 / nk
    cbet[same] = (ci_d * (inv_nk[:, None] - 1.0 / n_total))[same]
    cbet[diff] = -1.0 / n_total
    cwit[same] = (ci_d * inv_nk[:, None])[same]
    np.fill_diagonal(cbet, 0.0)
    np.fill_diagonal(cwit, 0.0)
    return CostMatrix(cbet, "label"), CostMatrix(cwit, "label")


def cost_lfda(ci: CostMatrix, labels: np.ndarray, class_counts: np.ndarray,
              X: np.ndarray, n_total: int | None = None):
    """LFDA label cost C^bet and constraint B = X (D^wit - C^wit) X^T."""
    from .solver import laplacian_scatter
    cbet, cwit = lfda_costs(ci, labels, class_counts, n_total)
    return cbet, laplacian_scatter(X, cwit)


def mmc_costs(labels: np.ndarray, class_counts: np.ndarray,
              n_total: int | None = None):
    """Between (c^b) and within (c^w) scatter costs of the maximum margin
    criterion; rows and columns of unlabeled examples are zero."""
    labels = np.asarray(labels)
    labeled = labels != UNLABELED
    if not labeled.any():
        raise ValueError("the MMC/FDA scatter costs need labeled examples")
    if np.any(class_counts == 0):
        raise ValueError("every class must have at least one labeled example")
    n = labels.shape[0]
    if n_total is None:
        n_total = int(labeled.sum())
    inv_nk = np.where(labeled, 1.0 / class_counts[np.maximum(labels, 1) - 1], 0.0)
    lab_pair = labeled[:, None] & labeled[None, :]
    same = lab_pair & (labels[:, None] == labels[None, :])
    cb = np.where(same, inv_nk[:, None] - 1.0 / n_total,
                  np.where(lab_pair, -1.0 / n_total, 0.0))
    cw = np.where(same, inv_nk[:, None], 0.0)
    np.fill_diagonal(cb, 0.0)
    np.fill_diagonal(cw, 0.0)
    return CostMatrix(cb, "label"), CostMatrix(cw, "label")


def cost_mmc(labels: np.ndarray, class_counts: np.ndarray,
             gamma_prime: float) -> CostMatrix:
    """Combined MMC label cost C^l = gamma' C^w - C^b."""
    if gamma_prime < 0:
        raise ValueError("gamma_prime must be non-negative")
    cb, cw = mmc_costs(labels, class_counts)
    return CostMatrix(gamma_prime * cw.entries - cb.entries, "label")


def heat_kernel_costs(X: np.ndarray, spec: HeatKernelSpec) -> CostMatrix:
    """Gaussian neighborhood costs exp(-||x_i - x_j||^2 / scale).

    The exponent is negated: a positive exponent would grow without bound
    with distance and penalize exactly the wrong pairs.  With local scaling
    the scale is sigma_i * sigma_j, sigma_i the distance to the k-th
    nearest neighbor of x_i (clamped away from zero for duplicates).
    """
    n = X.shape[1]
    if n < 2:
        raise ValueError("need at least two points")
    d2 = pairwise_sq_dists(X)
    if spec.scaling == "global":
        cu = np.exp(-d2 / spec.sigma**2)
    else:
        k = min(spec.k, n - 1)
        # distance to the k-th nearest other point
        part = np.partition(np.sqrt(d2), k, axis=1)
        sigma = part[:, k]
        floor = spec.distance_floor
        if floor is None:
            floor = 1e-12 * max(np.sqrt(d2.max()), 1.0)
        sigma = np.maximum(sigma, floor)
        cu = np.exp(-d2 / (sigma[:, None] * sigma[None, :]))
    np.fill_diagonal(cu, 0.0)
    cu = 0.5 * (cu + cu.T)
    return CostMatrix(cu, "unlabel")


def self_cost(n: int) -> CostMatrix:
    """Constant -1/(2n) cost over all pairs; on centered data the unlabel
    objective then equals the (negated) PCA objective."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return CostMatrix(np.full((n, n), -1.0 / (2 * n)), "unlabel")


def hadamard_power(cu: CostMatrix, alpha: int) -> CostMatrix:
    """Entrywise alpha-th power rescaled to preserve the Frobenius norm."""
    if alpha < 1 or int(alpha) != alpha:
        raise ValueError("alpha must be a positive integer")
    e = cu.dense()
    norm = np.linalg.norm(e)
    if norm == 0.0:
        raise ValueError("all-zero cost matrix: norm ratio undefined")
    if alpha == 1:
        return CostMatrix(e.copy(), cu.kind)
    p = e**alpha
    return CostMatrix(p * (norm / np.linalg.norm(p)), cu.kind)


def combine(cl: CostMatrix | None, cu: CostMatrix | None, gamma: float):
    """C = C^l + gamma C^u and its diagonal of row sums."""
    if cl is None and cu is None:
        raise ValueError("need at least one cost matrix")
    if gamma < 0:
        raise ValueError("gamma must be non-negative")
    parts = []
    if cl is not None:
        parts.append(cl.dense())
    if cu is not None:
        parts.append(gamma * cu.dense())
    c = sum(parts)
    c = 0.5 * (c + c.T)
    return CostMatrix(c, "combined"), c.sum(axis=1)


def export_dense_csv(cm: CostMatrix, path) -> None:
    np.savetxt(path, cm.dense(), delimiter=",")


def export_edge_list(cm: CostMatrix, threshold: float, path) -> None:
    """TSV rows (i, j, c_ij) for upper-triangle entries above threshold."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    e = cm.dense()
    with open(path, "w") as fh:
        fh.write("i\tj\tc_ij\n")
        iu, ju = np.triu_indices(e.shape[0], k=1)
        keep = e[iu, ju] > threshold
        for i, j in zip(iu[keep], ju[keep]):
            fh.write(f"{i}\t{j}\t{float(e[i, j])!r}\n")


def import_edge_list(path, n: int) -> CostMatrix:
    """Rebuild the thresholded matrix written by :func:`export_edge_list`."""
    e = np.zeros((n, n))
    with open(path) as fh:
        next(fh)
        for line in fh:
            i, j, v = line.split("\t")
            e[int(i), int(j)] = e[int(j), int(i)] = float(v)
    return CostMatrix(e, "unlabel")
