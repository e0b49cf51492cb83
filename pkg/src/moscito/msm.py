"""Markov state models over discrete trajectories and VAMP scoring.

The transition matrix counts lagged transitions and row-normalizes; the
VAMP-r score is the sum of the r-th powers of the top singular values of
K = C00^{-1/2} C01 C11^{-1/2}, where the covariances come from one-hot state
indicators without mean removal and the inverse square roots are rank-cut
pseudo-inverses.

Scores taken at different lag times are not comparable; the score-table
writer therefore only ranks within a lag.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .graphclust import DiscreteTrajectory

EPS_RANK = 1e-10


@dataclass
class TransitionModel:
    tau: int
    counts: np.ndarray  # (k, k) nonnegative integers
    P: np.ndarray  # row-stochastic


@dataclass
class VampComputation:
    """Lagged covariances, the Koopman matrix and its singular values."""

    C00: np.ndarray
    C01: np.ndarray
    C11: np.ndarray
    K: np.ndarray
    sigma: np.ndarray  # nonincreasing, length m (zero-padded past the rank)
    m: int
    r: int
    score: float


def _labels(dtraj) -> tuple[np.ndarray, int]:
    if isinstance(dtraj, DiscreteTrajectory):
        return np.asarray(dtraj.labels, dtype=np.int64), dtraj.k
    labels = np.asarray(dtraj, dtype=np.int64)
    return labels, int(labels.max()) + 1


def transition_matrix(dtraj, tau: int) -> TransitionModel:
    """Lag-tau transition counts and the row-stochastic transition matrix.

    Rows without any observed transition become self-loops so P stays
    stochastic.
    """
    labels, k = _labels(dtraj)
    n = len(labels)
    if tau < 1:
        raise ValidationError("tau must be >= 1")
    if tau >= n:
        raise ValidationError(f"tau={tau} must be smaller than the trajectory length {n}")
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (labels[:-tau], labels[tau:]), 1)
    row_sums = counts.sum(axis=1)
    P = np.zeros((k, k))
    has = row_sums > 0
    P[has] = counts[has] / row_sums[has, None]
    for i in np.nonzero(~has)[0]:
        P[i, i] = 1.0
    return TransitionModel(tau=tau, counts=counts, P=P)


def _inv_sqrt_psd(C: np.ndarray, eps_rank: float) -> np.ndarray:
    """Pseudo-inverse square root of a symmetric PSD matrix."""
    w, V = np.linalg.eigh(0.5 * (C + C.T))
    keep = w > eps_rank
    inv = np.zeros_like(w)
    inv[keep] = 1.0 / np.sqrt(w[keep])
    return (V * inv) @ V.T


def koopman_matrix(
    dtraj, tau: int, m: int, r: int = 2, eps_rank: float = EPS_RANK
) -> VampComputation:
    """Koopman matrix of the one-hot state indicators and its singular values.

    With N = n - tau lagged pairs, C00, C01 and C11 are the raw second
    moments of the leading/trailing indicator features (no mean removal).
    The top ``m`` singular values are retained; entries past the numerical
    rank are zero. ``score`` is their r-th-power sum.
    """
    labels, k = _labels(dtraj)
    n = len(labels)
    if tau < 1 or tau >= n:
        raise ValidationError(f"tau={tau} must lie in [1, {n})")
    if m < 1:
        raise ValidationError("m must be >= 1")
    N = n - tau
    lead, lag = labels[:N], labels[tau:]

    C01 = np.zeros((k, k))
    np.add.at(C01, (lead, lag), 1.0)
    C01 /= N
    C00 = np.diag(np.bincount(lead, minlength=k) / N)
    C11 = np.diag(np.bincount(lag, minlength=k) / N)

    K = _inv_sqrt_psd(C00, eps_rank) @ C01 @ _inv_sqrt_psd(C11, eps_rank)
    svals = np.linalg.svd(K, compute_uv=False)
    sigma = np.zeros(m)
    take = min(m, len(svals))
    sigma[:take] = svals[:take]
    score = float(np.sum(sigma**r))
    return VampComputation(
        C00=C00, C01=C01, C11=C11, K=K, sigma=sigma, m=m, r=r, score=score
    )


def vamp_r(dtraj, tau: int, m: int = 5, r: int = 2) -> float:
    """VAMP-r score: sum of the r-th powers of the top m singular values.

    Defaults follow the evaluation protocol used throughout the experiments
    (r=2, five singular values).
    """
    if r < 1:
        raise ValidationError("r must be >= 1")
    return koopman_matrix(dtraj, tau, m, r).score


# ---------------------------------------------------------------------------
# score tables

SCORE_COLUMNS = ("method", "k", "tau", "m", "r", "score")


def write_score_csv(rows, path) -> None:
    """Write (method, k, tau, m, r, score) rows sorted by (tau, k, method)."""
    rows = sorted(rows, key=lambda row: (row[2], row[1], row[0]))
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(SCORE_COLUMNS)
        for method, k, tau, m, r, score in rows:
            writer.writerow([method, k, tau, m, r, repr(float(score))])


def write_ranking_csv(rows, path) -> None:
    """Per-lag rankings only: scores at different lags are never compared."""
    by_tau: dict[int, list] = {}
    for row in rows:
        by_tau.setdefault(row[2], []).append(row)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(("tau", "rank", "method", "k", "score"))
        for tau in sorted(by_tau):
            ranked = sorted(by_tau[tau], key=lambda row: -row[5])
            for rank, (method, k, _tau, _m, _r, score) in enumerate(ranked, start=1):
                writer.writerow([tau, rank, method, k, repr(float(score))])
