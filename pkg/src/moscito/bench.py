"""Synthetic trajectories with planted metastable states, plus metrics.

The generator is a hidden Markov chain with uniform off-diagonal transition
mass and isotropic Gaussian emissions around well-separated state centers;
an optional moving average smears transitions over several frames the way
gradual conformational changes do. It stands in for real protein data at
desk scale while keeping the ground truth available.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .features import FeatureMatrix
from .graphclust import DiscreteTrajectory

NOISE_SIGMA = 1.0  # emission noise scale; separation is measured in units of it


@dataclass(frozen=True)
class SynthSpec:
    """Hidden-chain generator settings.

    ``state_separation`` is the pairwise center distance divided by the
    emission noise sigma; ``smoothing_window`` applies a centered moving
    average of that many frames (0 or 1 disables it).
    """

    n_states: int
    stay_prob: float
    n_frames: int
    d_feat: int
    state_separation: float
    smoothing_window: int = 0
    seed: int = 0

    def __post_init__(self):
        if self.n_states < 2:
            raise ValidationError("n_states must be >= 2")
        if not (0.0 < self.stay_prob <= 1.0):
            raise ValidationError("stay_prob must lie in (0, 1]")
        if self.n_frames < 1:
            raise ValidationError("n_frames must be >= 1")
        if self.d_feat < self.n_states:
            raise ValidationError("d_feat must be >= n_states (one center axis per state)")
        if self.state_separation <= 0:
            raise ValidationError("state_separation must be > 0")
        if self.smoothing_window < 0:
            raise ValidationError("smoothing_window must be >= 0")


def synth_trajectory(spec: SynthSpec):
    """Sample features and planted labels; deterministic under spec.seed.

    Returns (FeatureMatrix, DiscreteTrajectory). Features are shifted so the
    minimum is 0, matching the nonnegative regime of the solver.
    """
    rng = np.random.default_rng(spec.seed)
    k = spec.n_states
    labels = np.empty(spec.n_frames, dtype=np.int64)
    labels[0] = rng.integers(k)
    for t in range(1, spec.n_frames):
        if rng.random() < spec.stay_prob:
            labels[t] = labels[t - 1]
        else:
            j = int(rng.integers(k - 1))
            labels[t] = j if j < labels[t - 1] else j + 1

    # scaled one-hot centers: every pair sits state_separation * sigma apart
    scale = spec.state_separation * NOISE_SIGMA / np.sqrt(2.0)
    centers = np.zeros((k, spec.d_feat))
    centers[:, :k] = scale * np.eye(k)

    values = centers[labels].T + NOISE_SIGMA * rng.standard_normal(
        (spec.d_feat, spec.n_frames)
    )
    if spec.smoothing_window >= 2:
        kernel = np.full(spec.smoothing_window, 1.0 / spec.smoothing_window)
        values = np.vstack([np.convolve(row, kernel, mode="same") for row in values])
    values -= values.min()

    fm = FeatureMatrix(values, [("synth", i) for i in range(spec.d_feat)], "raw")
    return fm, DiscreteTrajectory(labels=labels, k=k)


def _label_array(d) -> np.ndarray:
    if isinstance(d, DiscreteTrajectory):
        return np.asarray(d.labels)
    return np.asarray(d)


def ari(a, b) -> float:
    """Adjusted Rand index between two labelings of the same time steps."""
    la, lb = _label_array(a), _label_array(b)
    if len(la) != len(lb):
        raise ValidationError(f"label lengths differ: {len(la)} vs {len(lb)}")
    n = len(la)
    _, ia = np.unique(la, return_inverse=True)
    _, ib = np.unique(lb, return_inverse=True)
    contingency = np.zeros((ia.max() + 1, ib.max() + 1), dtype=np.int64)
    np.add.at(contingency, (ia, ib), 1)

    def comb2(x):
        return x * (x - 1) / 2.0

    sum_ij = comb2(contingency.astype(np.float64)).sum()
    sum_a = comb2(contingency.sum(axis=1).astype(np.float64)).sum()
    sum_b = comb2(contingency.sum(axis=0).astype(np.float64)).sum()
    total = comb2(float(n))
    expected = sum_a * sum_b / total if total > 0 else 0.0
    max_index = 0.5 * (sum_a + sum_b)
    denom = max_index - expected
    if denom == 0:
        return 1.0
    return float((sum_ij - expected) / denom)


def segment_count(d) -> int:
    """Number of maximal constant-label runs."""
    labels = _label_array(d)
    if len(labels) < 1:
        raise ValidationError("empty discrete trajectory")
    return int(1 + np.sum(labels[1:] != labels[:-1]))
