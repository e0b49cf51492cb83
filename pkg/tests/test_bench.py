import numpy as np
import pytest

from moscito import bench
from moscito.errors import ValidationError


def spec(**kw):
    base = dict(
        n_states=3, stay_prob=0.95, n_frames=500, d_feat=5,
        state_separation=4.0, smoothing_window=0, seed=0,
    )
    base.update(kw)
    return bench.SynthSpec(**base)


def test_synth_deterministic():
    fa, da = bench.synth_trajectory(spec())
    fb, db = bench.synth_trajectory(spec())
    assert np.array_equal(fa.values, fb.values)
    assert np.array_equal(da.labels, db.labels)


def test_synth_stay_prob_one_single_label():
    _, planted = bench.synth_trajectory(spec(stay_prob=1.0))
    assert len(set(planted.labels.tolist())) == 1
    assert bench.segment_count(planted) == 1


def test_synth_self_transition_frequency():
    _, planted = bench.synth_trajectory(spec(stay_prob=0.99, n_frames=10_000))
    stays = np.mean(planted.labels[1:] == planted.labels[:-1])
    assert stays == pytest.approx(0.99, abs=0.01)


def test_synth_shifted_nonnegative_and_separated():
    fm, planted = bench.synth_trajectory(spec(seed=3))
    assert fm.values.min() == 0.0
    # centers pairwise distance = separation * sigma by construction
    centers = np.zeros((3, 5))
    centers[:, :3] = 4.0 / np.sqrt(2.0) * np.eye(3)
    d01 = np.linalg.norm(centers[0] - centers[1])
    assert d01 == pytest.approx(4.0)


def test_synth_smoothing_reduces_noise():
    rough, _ = bench.synth_trajectory(spec(stay_prob=1.0, n_frames=2000))
    smooth, _ = bench.synth_trajectory(spec(stay_prob=1.0, n_frames=2000, smoothing_window=9))
    assert smooth.values.std(axis=1).mean() < rough.values.std(axis=1).mean()


def test_synth_run_lengths_geometric():
    p = 0.99
    _, planted = bench.synth_trajectory(spec(stay_prob=p, n_frames=100_000))
    mean_run = planted.n / bench.segment_count(planted)
    assert mean_run == pytest.approx(1.0 / (1.0 - p), rel=0.1)


def test_synth_spec_validation():
    with pytest.raises(ValidationError):
        spec(n_states=1)
    with pytest.raises(ValidationError):
        spec(stay_prob=0.0)
    with pytest.raises(ValidationError):
        spec(d_feat=2)  # fewer axes than states
    with pytest.raises(ValidationError):
        spec(state_separation=-1.0)


def test_ari_identical_and_permuted():
    labels = np.array([0, 0, 1, 2, 2, 1])
    assert bench.ari(labels, labels) == 1.0
    permuted = np.array([2, 2, 0, 1, 1, 0])  # relabeled partition
    assert bench.ari(labels, permuted) == 1.0


def test_ari_independent_labelings_near_zero():
    rng = np.random.default_rng(0)
    a = rng.integers(0, 4, size=10_000)
    b = rng.integers(0, 4, size=10_000)
    assert abs(bench.ari(a, b)) < 0.02


def test_ari_symmetric_and_validated():
    rng = np.random.default_rng(1)
    a = rng.integers(0, 3, size=100)
    b = rng.integers(0, 5, size=100)
    assert bench.ari(a, b) == pytest.approx(bench.ari(b, a), abs=1e-12)
    with pytest.raises(ValidationError):
        bench.ari(a, b[:50])


def test_segment_count_examples():
    assert bench.segment_count(np.array([0, 0, 1, 1, 0])) == 3
    assert bench.segment_count(np.zeros(10, dtype=int)) == 1
    assert bench.segment_count(np.arange(6) % 2) == 6
    with pytest.raises(ValidationError):
        bench.segment_count(np.array([], dtype=int))


def test_segment_count_at_least_label_count():
    rng = np.random.default_rng(2)
    for _ in range(20):
        labels = rng.integers(0, 5, size=60)
        assert bench.segment_count(labels) >= len(set(labels.tolist()))
