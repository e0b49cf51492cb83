import csv

import numpy as np
import pytest

from moscito import msm
from moscito.errors import ValidationError
from moscito.graphclust import DiscreteTrajectory


def dtraj(labels, k=None):
    labels = np.asarray(labels, dtype=np.int64)
    return DiscreteTrajectory(labels=labels, k=k or int(labels.max()) + 1)


def test_transition_matrix_hand_counts():
    model = msm.transition_matrix(dtraj([0, 0, 1, 1]), 1)
    assert np.allclose(model.P, [[0.5, 0.5], [0.0, 1.0]])
    assert model.counts.sum() == 3  # n - tau

    model2 = msm.transition_matrix(dtraj([0, 1, 0, 1]), 1)
    assert np.allclose(model2.P, [[0.0, 1.0], [1.0, 0.0]])


def test_transition_matrix_single_state_and_self_loops():
    model = msm.transition_matrix(dtraj([0, 0, 0, 0]), 2)
    assert np.array_equal(model.P, [[1.0]])
    # state 2 never observed as a source at this lag -> self-loop row
    model2 = msm.transition_matrix(dtraj([0, 1, 2], k=3), 2)
    assert model2.P[2, 2] == 1.0
    assert np.allclose(model2.P.sum(axis=1), 1.0, atol=1e-12)


def test_transition_matrix_rejects_large_tau():
    with pytest.raises(ValidationError):
        msm.transition_matrix(dtraj([0, 1, 0]), 3)


def test_row_stochastic_random():
    rng = np.random.default_rng(0)
    for _ in range(10):
        labels = rng.integers(0, 4, size=50)
        model = msm.transition_matrix(dtraj(labels, k=4), int(rng.integers(1, 10)))
        assert np.allclose(model.P.sum(axis=1), 1.0, atol=1e-12)
        assert model.counts.sum() == 50 - model.tau


def test_koopman_alternating_chain():
    labels = np.array([i % 2 for i in range(100)])
    comp = msm.koopman_matrix(dtraj(labels), tau=1, m=2)
    assert np.allclose(np.diag(comp.C00), [50 / 99, 49 / 99], atol=1e-12)
    assert np.allclose(comp.K, [[0.0, 1.0], [1.0, 0.0]], atol=1e-9)
    assert np.allclose(comp.sigma, [1.0, 1.0], atol=1e-9)
    assert msm.vamp_r(dtraj(labels), 1, m=2, r=2) == pytest.approx(2.0, abs=1e-9)


def test_koopman_constant_chain():
    labels = np.zeros(50, dtype=int)
    comp = msm.koopman_matrix(dtraj(labels), tau=1, m=1)
    assert np.allclose(comp.K, [[1.0]], atol=1e-12)
    assert msm.vamp_r(dtraj(labels), 1, m=1, r=2) == pytest.approx(1.0)
    # zero-padded sigma keeps m=5 well defined on a single state
    assert msm.vamp_r(dtraj(labels), 1, m=5, r=2) == pytest.approx(1.0)


def test_koopman_iid_second_singular_value_vanishes():
    rng = np.random.default_rng(1)
    labels = rng.integers(0, 2, size=100_000)
    comp = msm.koopman_matrix(dtraj(labels), tau=1, m=2)
    assert comp.sigma[0] == pytest.approx(1.0, abs=0.05)
    assert comp.sigma[1] == pytest.approx(0.0, abs=0.05)


def test_sigma_bounded_by_one():
    rng = np.random.default_rng(2)
    for trial in range(20):
        k = int(rng.integers(1, 6))
        labels = rng.integers(0, k, size=int(rng.integers(10, 400)))
        comp = msm.koopman_matrix(dtraj(labels, k=k), tau=1, m=5)
        assert comp.sigma[0] <= 1.0 + 1e-6
        assert np.all(np.diff(comp.sigma) <= 1e-12)  # nonincreasing
        assert msm.vamp_r(dtraj(labels, k=k), 1, m=5, r=2) <= 5.0 + 1e-6


def test_vamp_invariant_under_relabeling():
    rng = np.random.default_rng(3)
    labels = rng.integers(0, 4, size=300)
    perm = rng.permutation(4)
    score_a = msm.vamp_r(dtraj(labels, k=4), 5, m=4, r=2)
    score_b = msm.vamp_r(dtraj(perm[labels], k=4), 5, m=4, r=2)
    assert score_b == pytest.approx(score_a, abs=1e-10)


def test_vamp_argument_validation():
    with pytest.raises(ValidationError):
        msm.vamp_r(dtraj([0, 1]), 1, m=0)
    with pytest.raises(ValidationError):
        msm.vamp_r(dtraj([0, 1]), 1, m=1, r=0)
    with pytest.raises(ValidationError):
        msm.koopman_matrix(dtraj([0, 1]), 2, 1)


def test_score_and_ranking_csv(tmp_path):
    rows = [
        ("moscito", 3, 1, 5, 2, 2.5),
        ("ssc", 3, 1, 5, 2, 2.0),
        ("moscito", 3, 10, 5, 2, 1.5),
        ("ssc", 3, 10, 5, 2, 1.9),
    ]
    spath = tmp_path / "scores.csv"
    msm.write_score_csv(rows, spath)
    with open(spath) as fh:
        parsed = list(csv.reader(fh))
    assert parsed[0] == list(msm.SCORE_COLUMNS)
    assert len(parsed) == 5

    rpath = tmp_path / "rankings.csv"
    msm.write_ranking_csv(rows, rpath)
    with open(rpath) as fh:
        ranked = list(csv.reader(fh))
    # rankings are sectioned per tau: tau=1 ranks moscito first, tau=10 ssc first
    tau1 = [r for r in ranked[1:] if r[0] == "1"]
    tau10 = [r for r in ranked[1:] if r[0] == "10"]
    assert tau1[0][2] == "moscito" and tau1[0][1] == "1"
    assert tau10[0][2] == "ssc" and tau10[0][1] == "1"
