"""Comparison methods: PCA + k-means, TICA + k-means, and SSC.

All three consume the same feature matrix (rows = dimensions, columns =
time steps) and emit a DiscreteTrajectory, so they can be scored exactly
like the main pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._kmeans import kmeans_fit
from .errors import ValidationError
from .features import FeatureMatrix
from .graphclust import DiscreteTrajectory, spectral_clustering

try:  # pragma: no cover - exercised implicitly when numba is installed
    from numba import njit
except ImportError:  # pragma: no cover
    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

EPS_RANK = 1e-10


def _as_matrix(X) -> np.ndarray:
    if isinstance(X, FeatureMatrix):
        return X.values
    return np.asarray(X, dtype=np.float64)


# ---------------------------------------------------------------------------
# PCA

def pca_full(X):
    """Eigenvalues (descending) and eigenvectors of the sample covariance.

    Returns (eigvals, eigvecs, mean); columns of eigvecs are the components.
    """
    Xm = _as_matrix(X)
    n = Xm.shape[1]
    mean = Xm.mean(axis=1, keepdims=True)
    Xc = Xm - mean
    C = Xc @ Xc.T / max(n - 1, 1)
    w, V = np.linalg.eigh(C)
    return w[::-1], V[:, ::-1], mean


def pca_project(X, dims: int) -> np.ndarray:
    """Project onto the top ``dims`` principal components; rows are components."""
    Xm = _as_matrix(X)
    d_feat, n = Xm.shape
    if dims < 1 or dims > min(d_feat, n):
        raise ValidationError(f"dims={dims} must lie in [1, {min(d_feat, n)}]")
    w, V, mean = pca_full(Xm)
    rank = int(np.sum(w > max(w[0], 0.0) * 1e-12)) if w[0] > 0 else 0
    if dims > rank:
        raise ValidationError(f"dims={dims} exceeds the data rank {rank}")
    return V[:, :dims].T @ (Xm - mean)


# ---------------------------------------------------------------------------
# TICA

def tica_full(X, lag: int, eps_rank: float = EPS_RANK):
    """Generalized eigenpairs of the symmetrized lagged covariance.

    Solves C(lag) v = w C(0) v on mean-free data. C(0) averages the leading
    and trailing halves, which bounds every eigenvalue by 1 in magnitude;
    near-null directions of C(0) are dropped by the pseudo-inverse cutoff.
    Returns (eigvals descending, eigvecs as columns, mean).
    """
    Xm = _as_matrix(X)
    n = Xm.shape[1]
    if lag < 1 or lag >= n:
        raise ValidationError(f"lag={lag} must lie in [1, {n})")
    mean = Xm.mean(axis=1, keepdims=True)
    Y = Xm - mean
    Y0, Yt = Y[:, :-lag], Y[:, lag:]
    N = n - lag
    C0 = (Y0 @ Y0.T + Yt @ Yt.T) / (2.0 * N)
    Ct = (Y0 @ Yt.T + Yt @ Y0.T) / (2.0 * N)

    w0, V0 = np.linalg.eigh(C0)
    keep = w0 > eps_rank * max(1.0, w0[-1] if len(w0) else 1.0)
    inv = np.zeros_like(w0)
    inv[keep] = 1.0 / np.sqrt(w0[keep])
    S = (V0 * inv) @ V0.T

    M = S @ Ct @ S
    w, W = np.linalg.eigh(0.5 * (M + M.T))
    order = np.argsort(w)[::-1]
    return w[order], S @ W[:, order], mean


def tica_project(X, lag: int, dims: int) -> np.ndarray:
    """Rows are projections onto the top ``dims`` independent components."""
    Xm = _as_matrix(X)
    if dims < 1 or dims > Xm.shape[0]:
        raise ValidationError(f"dims={dims} must lie in [1, {Xm.shape[0]}]")
    _, V, mean = tica_full(Xm, lag)
    return V[:, :dims].T @ (Xm - mean)


# ---------------------------------------------------------------------------
# k-means

def kmeans(Y, k: int, seed: int = 0) -> DiscreteTrajectory:
    """k-means over the columns of Y (points are time steps).

    k-means++ seeding, Lloyd iterations to centroid movement < 1e-8 (at most
    300), 10 restarts with the best inertia winning; deterministic under seed.
    """
    Ym = _as_matrix(Y)
    labels, _, _ = kmeans_fit(Ym.T, k, seed)
    dtraj = DiscreteTrajectory(labels=labels, k=k)
    dtraj.validate()
    return dtraj


# ---------------------------------------------------------------------------
# SSC

@dataclass
class SscModel:
    """Sparse self-expression coefficients, one column per data point."""

    C: np.ndarray  # (n, n), zero diagonal
    lambda_ssc: float


@njit(cache=True)
def _lasso_cd_gram(G, target_col, lam, tol, max_sweeps):
    """Coordinate descent for 0.5 ||y_i - Y c||^2 + lam ||c||_1 on the Gram
    matrix, with the target coordinate pinned to zero. G must be symmetric."""
    n = G.shape[0]
    c = np.zeros(n)
    Gc = np.zeros(n)
    for _ in range(max_sweeps):
        max_delta = 0.0
        for j in range(n):
            if j == target_col:
                continue
            gjj = G[j, j]
            if gjj <= 0.0:
                continue
            old = c[j]
            rho = G[j, target_col] - (Gc[j] - gjj * old)
            if rho > lam:
                new = (rho - lam) / gjj
            elif rho < -lam:
                new = (rho + lam) / gjj
            else:
                new = 0.0
            if new != old:
                delta = new - old
                c[j] = new
                row = G[j]
                for t in range(n):
                    Gc[t] += delta * row[t]
                d = abs(delta)
                if d > max_delta:
                    max_delta = d
        if max_delta < tol:
            break
    return c


def ssc_self_expression(
    X, lambda_ssc: float | None = None, tol: float = 1e-6, max_sweeps: int = 1000
) -> SscModel:
    """LASSO self-expression of every column in terms of the others.

    ``lambda_ssc`` defaults to 0.01 * max_i ||X^T x_i||_inf; it must be
    positive when given.
    """
    Xm = _as_matrix(X)
    n = Xm.shape[1]
    if n < 2:
        raise ValidationError("self-expression needs at least 2 columns")
    G = Xm.T @ Xm
    if lambda_ssc is None:
        lambda_ssc = 0.01 * float(np.max(np.abs(G)))
    if lambda_ssc <= 0:
        raise ValidationError(f"lambda_ssc must be > 0, got {lambda_ssc}")
    C = np.zeros((n, n))
    G = np.ascontiguousarray(G)
    for i in range(n):
        C[:, i] = _lasso_cd_gram(G, i, lambda_ssc, tol, max_sweeps)
    return SscModel(C=C, lambda_ssc=float(lambda_ssc))


def ssc_cluster(X, lambda_ssc: float | None, k: int, seed: int = 0) -> DiscreteTrajectory:
    """SSC: sparse self-expression, |C| + |C|^T affinity, spectral clustering."""
    model = ssc_self_expression(X, lambda_ssc)
    A = np.abs(model.C) + np.abs(model.C).T
    return spectral_clustering(A, k, seed)
