"""Affinity graph construction and spectral clustering of time steps.

The affinity between two time steps is the cosine similarity of their code
vectors; spectral clustering follows the normalized-Laplacian recipe
(symmetric normalization, row-normalized eigenvector embedding, seeded
k-means).
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.csgraph as csgraph

from ._kmeans import kmeans_fit
from .errors import ValidationError

# tab10-style palette for segmentation strips
_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


@dataclass
class AffinityGraph:
    """Pairwise cosine similarities of code columns.

    ``G`` is the clustering graph with negatives clipped to 0; ``raw`` keeps
    the unclipped values in [-1, 1] for inspection.
    """

    G: np.ndarray
    raw: np.ndarray

    @property
    def n(self) -> int:
        return self.G.shape[0]


@dataclass
class DiscreteTrajectory:
    """Per-time-step cluster labels in [0, k)."""

    labels: np.ndarray
    k: int

    @property
    def n(self) -> int:
        return len(self.labels)

    def validate(self) -> None:
        if self.labels.ndim != 1:
            raise ValidationError("labels must be a 1-D vector")
        if self.n and (self.labels.min() < 0 or self.labels.max() >= self.k):
            raise ValidationError(f"labels must lie in [0, {self.k})")


def affinity(Z: np.ndarray) -> AffinityGraph:
    """Cosine-similarity graph over the columns of Z.

    All-zero columns get zero rows/columns (self-similarity 0 rather than 1).
    """
    Z = np.asarray(Z, dtype=np.float64)
    if np.any(~np.isfinite(Z)):
        raise ValidationError("Z contains non-finite entries")
    norms = np.linalg.norm(Z, axis=0)
    safe = np.where(norms > 0, norms, 1.0)
    Zn = Z / safe
    raw = np.clip(Zn.T @ Zn, -1.0, 1.0)
    zero = norms == 0
    raw[zero, :] = 0.0
    raw[:, zero] = 0.0
    return AffinityGraph(G=np.maximum(raw, 0.0), raw=raw)


def spectral_clustering(G, k: int, seed: int = 0) -> DiscreteTrajectory:
    """Cluster the affinity graph into k groups.

    Uses L_sym = I - D^{-1/2} G D^{-1/2}, the k smallest-eigenvalue
    eigenvectors with row normalization, and seeded k-means (10 restarts).
    Accepts an AffinityGraph or a plain symmetric nonnegative matrix. A graph
    with more than k connected components is clustered anyway, with a warning.
    """
    A = G.G if isinstance(G, AffinityGraph) else np.asarray(G, dtype=np.float64)
    n = A.shape[0]
    if k > n:
        raise ValidationError(f"k={k} exceeds the number of time steps {n}")
    if k < 1:
        raise ValidationError("k must be >= 1")

    n_comp, _ = csgraph.connected_components(sp.csr_matrix(A > 0), directed=False)
    if n_comp > k:
        warnings.warn(
            f"affinity graph has {n_comp} connected components but k={k}; "
            "clustering proceeds on the disconnected graph",
            stacklevel=2,
        )

    deg = A.sum(axis=1)
    inv_sqrt = np.where(deg > 0, 1.0 / np.sqrt(np.where(deg > 0, deg, 1.0)), 0.0)
    L_sym = np.eye(n) - inv_sqrt[:, None] * A * inv_sqrt[None, :]
    L_sym = 0.5 * (L_sym + L_sym.T)
    _, vecs = scipy.linalg.eigh(L_sym, subset_by_index=[0, k - 1])

    row_norm = np.linalg.norm(vecs, axis=1, keepdims=True)
    emb = np.where(row_norm > 0, vecs / np.where(row_norm > 0, row_norm, 1.0), 0.0)
    labels, _, _ = kmeans_fit(emb, k, seed)
    dtraj = DiscreteTrajectory(labels=labels.astype(np.int64), k=k)
    dtraj.validate()
    return dtraj


# ---------------------------------------------------------------------------
# serialization

def write_dtraj_csv(dtraj: DiscreteTrajectory, path) -> None:
    """One label per line, no header."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for v in dtraj.labels:
            fh.write(f"{int(v)}\n")


def read_dtraj_csv(path, k: int | None = None) -> DiscreteTrajectory:
    with open(path, encoding="utf-8") as fh:
        labels = np.asarray([int(line.strip()) for line in fh if line.strip()], dtype=np.int64)
    if labels.size == 0:
        raise ValidationError(f"{path}: empty discrete trajectory")
    dtraj = DiscreteTrajectory(labels=labels, k=int(labels.max()) + 1 if k is None else k)
    dtraj.validate()
    return dtraj


def _runs(labels: np.ndarray):
    start = 0
    for t in range(1, len(labels) + 1):
        if t == len(labels) or labels[t] != labels[start]:
            yield start, t, int(labels[start])
            start = t


def segmentation_svg(dtraj: DiscreteTrajectory, height: int = 40) -> str:
    """A segmentation strip: one colored rect per maximal constant-label run."""
    n = dtraj.n
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{n}" height="{height}" '
        f'viewBox="0 0 {n} {height}" preserveAspectRatio="none">'
    ]
    for start, end, label in _runs(dtraj.labels):
        color = _PALETTE[label % len(_PALETTE)]
        parts.append(
            f'<rect x="{start}" y="0" width="{end - start}" height="{height}" fill="{color}"/>'
        )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def write_segmentation_svg(dtraj: DiscreteTrajectory, path, height: int = 40) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(segmentation_svg(dtraj, height))
