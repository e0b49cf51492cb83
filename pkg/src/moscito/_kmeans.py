"""Seeded k-means engine shared by spectral clustering and the baselines.

k-means++ initialization, Lloyd iterations until the largest centroid move
drops below an absolute tolerance, a fixed number of restarts with the best
inertia winning. Fully deterministic under the seed.
"""

from __future__ import annotations

import numpy as np

from .errors import ValidationError


def _squared_distances(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # (n, k) via the expanded square; clip tiny negatives from cancellation
    d2 = (
        np.sum(points**2, axis=1)[:, None]
        - 2.0 * points @ centers.T
        + np.sum(centers**2, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeans_pp(points: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = _squared_distances(points, centers[:1]).ravel()
    for c in range(1, k):
        total = d2.sum()
        if total <= 0:
            # all mass on existing centers; fall back to uniform choice
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=d2 / total))
        centers[c] = points[idx]
        d2 = np.minimum(d2, _squared_distances(points, centers[c : c + 1]).ravel())
    return centers


def _lloyd(points, centers, max_iters, tol):
    k = centers.shape[0]
    labels = np.zeros(points.shape[0], dtype=np.int64)
    for _ in range(max_iters):
        d2 = _squared_distances(points, centers)
        labels = np.argmin(d2, axis=1)
        new_centers = centers.copy()
        for c in range(k):
            members = labels == c
            if np.any(members):
                new_centers[c] = points[members].mean(axis=0)
            else:
                # classic fix: move an empty cluster onto the farthest point
                far = int(np.argmax(d2[np.arange(points.shape[0]), labels]))
                new_centers[c] = points[far]
        move = np.max(np.linalg.norm(new_centers - centers, axis=1))
        centers = new_centers
        if move < tol:
            break
    d2 = _squared_distances(points, centers)
    labels = np.argmin(d2, axis=1)
    inertia = float(d2[np.arange(points.shape[0]), labels].sum())
    return labels, centers, inertia


def kmeans_fit(
    points: np.ndarray,
    k: int,
    seed: int,
    restarts: int = 10,
    max_iters: int = 300,
    tol: float = 1e-8,
):
    """Cluster row-vector ``points`` (n, p) into k groups.

    Returns (labels, centers, inertia) of the best restart.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    if k > n:
        raise ValidationError(f"k={k} exceeds the number of points {n}")
    if k < 1:
        raise ValidationError("k must be >= 1")
    if k == n:
        # one point per cluster is optimal (inertia 0) and keeps labels distinct
        return np.arange(n, dtype=np.int64), points.copy(), 0.0

    rng = np.random.default_rng(seed)
    seeds = rng.integers(np.iinfo(np.int64).max, size=restarts)
    best = None
    for s in seeds:
        sub = np.random.default_rng(int(s))
        centers0 = _kmeans_pp(points, k, sub)
        labels, centers, inertia = _lloyd(points, centers0, max_iters, tol)
        if best is None or inertia < best[2]:
            best = (labels, centers, inertia)
    return best
