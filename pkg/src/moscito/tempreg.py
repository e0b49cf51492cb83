"""Sequential-neighbor weight matrices and the temporal graph Laplacian.

The coding matrix is regularized by tr(Z L Z^T) where L = D - W is the
Laplacian of a banded weight matrix W over time steps: w_ij = g(|i - j|) for
1 <= |i - j| <= s and 0 elsewhere. Four decay profiles g are supported.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError

WEIGHT_MODES = ("binary", "gaussian", "logarithmic", "exponential")


@dataclass(frozen=True)
class TemporalWeightConfig:
    """Window size and decay profile for the sequential-neighbor weights.

    ``gaussian_sigma`` defaults to s/2 (so the window edge sits near two
    standard deviations); ``exp_theta`` is the exponential decay constant
    with g(1) normalized to 1.
    """

    s: int
    mode: str = "binary"
    gaussian_sigma: float | None = None
    exp_theta: float = 1.0

    def __post_init__(self):
        if self.s < 0:
            raise ValidationError(f"s must be >= 0, got {self.s}")
        if self.mode not in WEIGHT_MODES:
            raise ValidationError(f"unknown weight mode '{self.mode}' (one of {WEIGHT_MODES})")
        if self.gaussian_sigma is not None and self.gaussian_sigma <= 0:
            raise ValidationError("gaussian_sigma must be positive")
        if self.exp_theta <= 0:
            raise ValidationError("exp_theta must be positive")

    def offset_weight(self, j: int) -> float:
        """Weight g(j) at temporal offset j, for 1 <= j <= s."""
        if not (1 <= j <= self.s):
            return 0.0
        if self.mode == "binary":
            return 1.0
        if self.mode == "gaussian":
            sigma = self.gaussian_sigma if self.gaussian_sigma is not None else self.s / 2.0
            return math.exp(-(j * j) / (2.0 * sigma * sigma))
        if self.mode == "logarithmic":
            # s = 1 degenerates to binary; for s >= 2 drops from 1 at j=1 to 0 at j=s
            if self.s == 1:
                return 1.0
            return 1.0 - math.log(j) / math.log(self.s)
        return math.exp(-(j - 1) / self.exp_theta)


@dataclass(frozen=True)
class TemporalLaplacian:
    """W, its degree vector, and L = diag(degree) - W (banded sparse CSR)."""

    W: sp.csr_matrix
    degree: np.ndarray
    L: sp.csr_matrix

    @property
    def n(self) -> int:
        return self.L.shape[0]


def weight_matrix(n: int, cfg: TemporalWeightConfig) -> sp.csr_matrix:
    """Banded n x n weight matrix with w_ij = g(|i - j|) inside the window."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    offsets, bands = [], []
    for j in range(1, min(cfg.s, n - 1) + 1):
        g = cfg.offset_weight(j)
        band = np.full(n - j, g)
        offsets.extend([j, -j])
        bands.extend([band, band])
    if not offsets:
        return sp.csr_matrix((n, n))
    return sp.diags(bands, offsets, shape=(n, n), format="csr")


def temporal_laplacian(W) -> TemporalLaplacian:
    """Build L = diag(row sums) - W from a symmetric nonnegative W.

    Accepts a dense array or any scipy sparse matrix; W must be symmetric
    with zero diagonal.
    """
    Ws = sp.csr_matrix(W)
    if Ws.shape[0] != Ws.shape[1]:
        raise ValidationError(f"W must be square, got {Ws.shape}")
    asym = abs(Ws - Ws.T)
    if asym.nnz and asym.max() > 1e-12:
        raise ValidationError("W must be symmetric")
    if Ws.nnz and Ws.min() < 0:
        raise ValidationError("W must be nonnegative")
    if np.any(Ws.diagonal() != 0):
        raise ValidationError("W must have a zero diagonal")
    degree = np.asarray(Ws.sum(axis=1)).ravel()
    L = sp.diags(degree, format="csr") - Ws
    return TemporalLaplacian(W=Ws, degree=degree, L=sp.csr_matrix(L))


def _laplacian_matrix(L):
    if isinstance(L, TemporalLaplacian):
        return L.L
    return L


def regularizer_value(Z: np.ndarray, L) -> float:
    """tr(Z L Z^T), the weighted sum of squared code differences.

    Equals 0.5 * sum_ij w_ij ||z_i - z_j||^2; nonnegative for a Laplacian L.
    """
    Lm = _laplacian_matrix(L)
    Z = np.asarray(Z, dtype=np.float64)
    if Z.ndim != 2 or Z.shape[1] != Lm.shape[0]:
        raise ValidationError(
            f"Z has {Z.shape[1] if Z.ndim == 2 else '?'} columns, Laplacian is {Lm.shape[0]} x {Lm.shape[0]}"
        )
    ZL = (Lm @ Z.T).T if sp.issparse(Lm) else Z @ Lm
    return float(np.sum(ZL * Z))
