"""Laplacian scatter assembly and the regularized generalized eigenproblem.

The projection is found by minimizing trace(A X (D - C) X^T A^T) subject to
A B A^T = I: the rows of A are the generalized eigenvectors of
(X(D-C)X^T, B + eps*I) for the d smallest eigenvalues.
"""
from __future__ import annotations

import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import costs as costs_mod
from .costs import CostMatrix, HeatKernelSpec, combine, cost_dne, hadamard_power, \
    heat_kernel_costs, lfda_costs, mmc_costs, neighbor_graphs, self_cost
from .dataset import Dataset, UNLABELED, center

BASES = ("dne", "mfa", "lfda", "fda", "mmc", "none")
UNLABEL_MODES = ("heat", "self_pca", "none")
WEIGHTING_MODES = ("T1_identity", "T2_unit_rows", "T3_sqrt_lambda", "T4_combined")


@dataclass(frozen=True)
class LearnerSpec:
    """Which cost matrices to build and how to solve for the projection."""
    base: str = "lfda"                 # label-cost family, or "none"
    unlabel: str = "heat"              # "heat" | "self_pca" | "none"
    gamma: float = 1.0                 # weight of the unlabel cost
    alpha: int = 1                     # Hadamard power degree (heat costs only)
    k: int | None = None               # neighbor count; None: min(3, min_c n_c)
    dim: int = 2                       # target dimensionality
    weighting_mode: str = "T1_identity"
    heat: HeatKernelSpec = field(default_factory=HeatKernelSpec)
    gamma_prime: float = 1.0           # MMC within-scatter weight
    epsilon: float | None = None       # constraint regularizer; None: gamma
    kernel: "object | None" = None     # KernelSpec; handled by the KPCA trick

    def __post_init__(self):
        if self.base not in BASES:
            raise ValueError(f"unknown base {self.base!r}")
        if self.unlabel not in UNLABEL_MODES:
            raise ValueError(f"unknown unlabel mode {self.unlabel!r}")
        if self.weighting_mode not in WEIGHTING_MODES:
            raise ValueError(f"unknown weighting mode {self.weighting_mode!r}")
        if self.base == "none" and self.unlabel == "none":
            raise ValueError("base 'none' requires an unlabel cost")


@dataclass(frozen=True)
class EmbeddingModel:
    A: np.ndarray                      # (d, r) projection, rows are axes
    eigenvalues: np.ndarray            # (d,) ascending
    train_mean: np.ndarray             # (d0,)
    pre_pca: np.ndarray | None = None  # (d0, r) basis applied before A
    weighting_mode: str = "T1_identity"
    gamma: float = 0.0
    alpha: int = 1
    epsilon: float = 0.0

    @property
    def dim(self) -> int:
        return self.A.shape[0]

    @property
    def input_dim(self) -> int:
        return self.train_mean.shape[0]


def laplacian_scatter(X: np.ndarray, C: CostMatrix | np.ndarray) -> np.ndarray:
    """X (D - C) X^T with D the diagonal of row sums of C."""
    c = C.dense() if isinstance(C, CostMatrix) else np.asarray(C)
    if X.shape[1] != c.shape[0]:
        raise ValueError("column count of X must match the cost matrix size")
    d = c.sum(axis=1)
    L = (X * d) @ X.T - X @ c @ X.T
    return 0.5 * (L + L.T)


def regularize(B: np.ndarray, epsilon: float) -> np.ndarray:
    """B + eps * I."""
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    return B + epsilon * np.eye(B.shape[0])


def solve_gev(L: np.ndarray, B_reg: np.ndarray, dim: int):
    """Bottom-d generalized eigenpairs of L a = lambda B_reg a.

    B_reg must be symmetric positive definite; the problem is reduced to a
    standard symmetric one through its Cholesky factor.  Rows of the
    returned A satisfy A B_reg A^T = I; each row's first non-negligible
    component is made positive for reproducibility.
    """
    d0 = L.shape[0]
    if dim > d0:
        raise ValueError(f"target dimension {dim} exceeds input dimension {d0}")
    try:
        R = scipy.linalg.cholesky(B_reg, lower=False)
    except scipy.linalg.LinAlgError as exc:
        raise np.linalg.LinAlgError(
            "constraint matrix is not positive definite; increase the "
            "regularizer epsilon") from exc
    Rinv = scipy.linalg.solve_triangular(R, np.eye(d0), lower=False)
    M = Rinv.T @ L @ Rinv
    M = 0.5 * (M + M.T)
    lam, V = scipy.linalg.eigh(M)
    A = (Rinv @ V[:, :dim]).T
    # sign convention: first component of non-trivial magnitude positive
    for row in A:
        nz = np.flatnonzero(np.abs(row) > 1e-12 * max(np.abs(row).max(), 1e-300))
        if nz.size and row[nz[0]] < 0:
            row *= -1.0
    return A, lam[:dim]


def axis_weighting(A: np.ndarray, lam: np.ndarray, mode: str) -> np.ndarray:
    """Apply the diagonal axis-weight transform T to the rows of A."""
    if mode == "T1_identity":
        return A.copy()
    norms = np.linalg.norm(A, axis=1)
    if mode in ("T2_unit_rows", "T4_combined") and np.any(norms == 0):
        raise ValueError("zero-norm projection row; cannot normalize axes")
    lam_c = np.maximum(lam, 0.0)  # clamp tiny negative eigenvalues
    if mode == "T2_unit_rows":
        t = 1.0 / norms
    elif mode == "T3_sqrt_lambda":
        t = np.sqrt(lam_c)
    elif mode == "T4_combined":
        t = np.sqrt(lam_c) / norms
    else:
        raise ValueError(f"unknown weighting mode {mode!r}")
    return t[:, None] * A


def pca_preprocess(X: np.ndarray, rank_tol: float = 1e-10):
    """Project the (centered) columns of X onto their principal subspace.

    Components with singular value <= rank_tol * sigma_max are dropped, so
    the output has full row rank; pairwise distances are preserved exactly
    when only numerically null components are removed.
    """
    if X.shape[1] < 2:
        raise ValueError("need at least two examples")
    U, s, _ = np.linalg.svd(X, full_matrices=False)
    keep = s > rank_tol * (s[0] if s.size else 0.0)
    basis = U[:, keep]
    return basis.T @ X, basis


def numerical_rank(X: np.ndarray, rank_tol: float = 1e-10) -> int:
    s = np.linalg.svd(X, compute_uv=False)
    return int((s > rank_tol * (s[0] if s.size else 0.0)).sum())


def resolve_k(class_counts: np.ndarray) -> int:
    """Default neighbor count: min(3, smallest labeled class size)."""
    counts = np.asarray(class_counts)
    if np.any(counts == 0):
        raise ValueError("every class needs at least one labeled example")
    return int(min(3, counts.min()))


def build_cost_matrices(X: np.ndarray, labels: np.ndarray, spec: LearnerSpec):
    """Label cost C^l, constraint B and unlabel cost C^u for a learner."""
    n = X.shape[1]
    labeled = labels != UNLABELED
    class_counts = np.bincount(labels[labeled],
                               minlength=int(labels[labeled].max(initial=0)) + 1)[1:]
    cl, B = None, None

    if spec.base != "none":
        if not labeled.any():
            raise ValueError(f"base {spec.base!r} needs labeled examples")
        k = spec.k if spec.k is not None else resolve_k(class_counts[class_counts > 0])
        n_lab = int(labeled.sum())
        if spec.base in ("dne", "mfa"):
            ci, ce = neighbor_graphs(X, labels, k)
            if spec.base == "dne":
                cl = cost_dne(ci, ce)
                B = np.eye(X.shape[0])
            else:
                cl = CostMatrix(-ce.entries.toarray(), "label")
                B = laplacian_scatter(X, ci)
        elif spec.base in ("lfda", "fda"):
            ci, _ = neighbor_graphs(X, labels, k, dense_same_class=(spec.base == "fda"))
            cbet, cwit = lfda_costs(ci, labels, class_counts, n_total=n_lab)
            cl = cbet
            B = laplacian_scatter(X, cwit)
        elif spec.base == "mmc":
            cb, cw = mmc_costs(labels, class_counts, n_total=n_lab)
            cl = CostMatrix(spec.gamma_prime * cw.entries - cb.entries, "label")
            B = np.eye(X.shape[0])

    cu = None
    if spec.unlabel == "heat" and spec.gamma > 0:
        cu = heat_kernel_costs(X, spec.heat)
        if spec.alpha != 1:
            cu = hadamard_power(cu, spec.alpha)
    elif spec.unlabel == "self_pca" and spec.gamma > 0:
        cu = self_cost(n)

    if B is None:
        if spec.unlabel == "heat" and cu is not None:
            # classical locality-preserving constraint X D^u X^T
            B = (X * cu.dense().sum(axis=1)) @ X.T
            B = 0.5 * (B + B.T)
        else:
            B = np.eye(X.shape[0])
    return cl, B, cu


def fit(dataset: Dataset, spec: LearnerSpec) -> EmbeddingModel:
    """Full pipeline: center, optional PCA, cost matrices, GEV, weighting."""
    if spec.kernel is not None:
        raise ValueError("kernelized specs go through the KPCA trick "
                         "(ssdr.kpca.kpca_trick_fit)")
    ds, mean = center(dataset)
    X = ds.X
    basis = None
    if numerical_rank(X) < X.shape[0]:
        X, basis = pca_preprocess(X)
    if spec.dim > X.shape[0]:
        raise ValueError(f"target dimension {spec.dim} exceeds the data rank {X.shape[0]}")

    cl, B, cu = build_cost_matrices(X, ds.labels, spec)
    gamma = spec.gamma if cu is not None else 0.0
    C, _ = combine(cl, cu, gamma)
    L = laplacian_scatter(X, C)

    eps = spec.epsilon if spec.epsilon is not None else gamma
    is_identity = B.shape[0] == B.shape[1] and np.array_equal(B, np.eye(B.shape[0]))
    if eps == 0.0 and not is_identity and numerical_rank(B) < B.shape[0]:
        eps = 1e-8 * max(np.trace(B), 1.0) / B.shape[0]
        warnings.warn("constraint matrix is singular with epsilon = 0; "
                      f"falling back to epsilon = {eps:g}")
    A, lam = solve_gev(L, regularize(B, eps), spec.dim)
    A = axis_weighting(A, lam, spec.weighting_mode)
    return EmbeddingModel(A=A, eigenvalues=lam, train_mean=mean, pre_pca=basis,
                          weighting_mode=spec.weighting_mode, gamma=gamma,
                          alpha=spec.alpha, epsilon=eps)


def embed(model: EmbeddingModel, x: np.ndarray) -> np.ndarray:
    """Map an input vector (or a (d0, m) column matrix) to the subspace."""
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    cols = x[:, None] if single else x
    if cols.shape[0] != model.input_dim:
        raise ValueError(f"expected inputs of dimension {model.input_dim}, "
                         f"got {cols.shape[0]}")
    cols = cols - model.train_mean[:, None]
    if model.pre_pca is not None:
        cols = model.pre_pca.T @ cols
    z = model.A @ cols
    return z[:, 0] if single else z


_MAGIC = b"SSDR"
_VERSION = 1
_MODE_CODES = {m: i + 1 for i, m in enumerate(WEIGHTING_MODES)}
_CODE_MODES = {v: k for k, v in _MODE_CODES.items()}


def save_model(model: EmbeddingModel, path) -> None:
    """Versioned little-endian flat file: header, then train_mean, the PCA
    basis (row-major), A (row-major) and the eigenvalues as float64."""
    r = model.pre_pca.shape[1] if model.pre_pca is not None else 0
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IqqqqdqdQ", _VERSION, model.input_dim, model.dim, r,
                             _MODE_CODES[model.weighting_mode], model.epsilon,
                             model.alpha, model.gamma, model.A.shape[1]))
        for arr in (model.train_mean, model.pre_pca, model.A, model.eigenvalues):
            if arr is not None:
                fh.write(np.ascontiguousarray(arr, dtype="<f8").tobytes())


def load_model(path) -> EmbeddingModel:
    with open(path, "rb") as fh:
        if fh.read(4) != _MAGIC:
            raise ValueError(f"{path}: not a model file")
        version, d0, dim, r, mode, eps, alpha, gamma, a_cols = \
            struct.unpack("<IqqqqdqdQ", fh.read(struct.calcsize("<IqqqqdqdQ")))
        if version != _VERSION:
            raise ValueError(f"{path}: unsupported version {version}")
        read = lambda count: np.frombuffer(fh.read(8 * count), dtype="<f8").copy()
        mean = read(d0)
        basis = read(d0 * r).reshape(d0, r) if r else None
        A = read(dim * a_cols).reshape(dim, a_cols)
        lam = read(dim)
    return EmbeddingModel(A=A, eigenvalues=lam, train_mean=mean, pre_pca=basis,
                          weighting_mode=_CODE_MODES[mode], gamma=gamma,
                          alpha=alpha, epsilon=eps)
