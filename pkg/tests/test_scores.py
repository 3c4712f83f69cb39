import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import prob_vectors
from mmicp.scores import (
    RegressionPrediction,
    ScoreKind,
    ScoreSpec,
    aps_score,
    class_score,
    lac_score,
    margin_score,
    raps_score,
    regression_score,
    score_matrix,
    true_label_scores,
)

RAPS = ScoreSpec(ScoreKind.RAPS, raps_lambda=0.1, raps_kreg=1)


def test_lac():
    assert lac_score([0.7, 0.2, 0.1], 0) == pytest.approx(0.3)
    assert lac_score([0.5, 0.5], 1) == 0.5


def test_aps_cumulative_mass():
    assert aps_score([0.5, 0.3, 0.2], 0) == pytest.approx(0.5)
    assert aps_score([0.5, 0.3, 0.2], 2) == pytest.approx(1.0)
    assert aps_score([0.5, 0.3, 0.2], 1, u=0.5) == pytest.approx(0.65)


def test_aps_ties_lower_index_first():
    # equal mass: class 0 ranks above class 1
    assert aps_score([0.4, 0.4, 0.2], 0) == pytest.approx(0.4)
    assert aps_score([0.4, 0.4, 0.2], 1) == pytest.approx(0.8)


def test_raps_penalty():
    assert raps_score([0.5, 0.3, 0.2], 2, spec=RAPS) == pytest.approx(1.2)
    assert raps_score([0.5, 0.3, 0.2], 0, spec=RAPS) == pytest.approx(0.5)


def test_margin():
    assert margin_score([0.7, 0.2, 0.1], 0) == pytest.approx(-0.5)
    assert margin_score([0.7, 0.2, 0.1], 1) == pytest.approx(0.5)
    assert margin_score([0.5, 0.5], 0) == margin_score([0.5, 0.5], 1) == 0.0


def test_regression_scores():
    assert regression_score(RegressionPrediction(2.0), 5.0, ScoreSpec(ScoreKind.ABS_RESIDUAL)) == 3.0
    assert regression_score(RegressionPrediction(2.0, weight=2.0), 5.0, ScoreSpec(ScoreKind.WEIGHTED_RESIDUAL)) == 1.5
    cqr = RegressionPrediction(0.5, lower_q=0.0, upper_q=1.0)
    assert regression_score(cqr, 0.5, ScoreSpec(ScoreKind.CQR)) == -0.5


@pytest.mark.parametrize("bad", [[0.5, 0.6], [-0.1, 1.1], [1.0]])
def test_invalid_probabilities(bad):
    with pytest.raises(ValueError):
        lac_score(bad, 0)


def test_label_out_of_range():
    with pytest.raises(IndexError):
        aps_score([0.5, 0.5], 2)


def test_nonpositive_weight():
    with pytest.raises(ValueError):
        RegressionPrediction(0.0, weight=0.0)


def test_spec_roundtrip():
    spec = ScoreSpec(ScoreKind.RAPS, 0.2, 3, True)
    assert ScoreSpec.from_dict(spec.to_dict()) == spec
    assert spec.randomized
    assert not ScoreSpec(ScoreKind.LAC, aps_randomized=True).randomized


@given(prob_vectors())
def test_score_ranges(p):
    for y in range(p.size):
        assert 0.0 <= lac_score(p, y) <= 1.0
        assert 0.0 < aps_score(p, y) <= 1.0 + 1e-12
        assert raps_score(p, y, spec=RAPS) >= aps_score(p, y)
        assert -1.0 <= margin_score(p, y) <= 1.0


@given(prob_vectors())
def test_aps_monotone_in_rank(p):
    order = np.argsort(-p, kind="stable")
    s = [aps_score(p, int(y)) for y in order]
    assert all(a <= b + 1e-15 for a, b in zip(s, s[1:]))


@given(prob_vectors(), st.randoms(use_true_random=False))
def test_label_permutation_invariance(p, rnd):
    perm = list(range(p.size))
    rnd.shuffle(perm)
    q = p[perm]  # q[i] = p[perm[i]]
    for i, y in enumerate(perm):
        assert lac_score(q, i) == lac_score(p, y)
        assert margin_score(q, i) == pytest.approx(margin_score(p, y), abs=1e-15)
        if len(set(p.tolist())) == p.size:  # APS ties depend on index order
            assert aps_score(q, i) == pytest.approx(aps_score(p, y), abs=1e-12)


@given(st.floats(-5, 5), st.floats(0, 3), st.floats(-10, 10))
def test_cqr_sign(lo, width, y):
    pred = RegressionPrediction(lo, lower_q=lo, upper_q=lo + width)
    s = regression_score(pred, y, ScoreSpec(ScoreKind.CQR))
    assert (s < 0) == (lo < y < lo + width)


@pytest.mark.parametrize("kind", ["LAC", "APS", "RAPS", "MARGIN"])
def test_score_matrix_matches_scalar(kind):
    rng = np.random.default_rng(0)
    P = rng.dirichlet(np.ones(6), size=20)
    P[3] = [0.25, 0.25, 0.25, 0.25, 0.0, 0.0]  # ties
    spec = ScoreSpec(kind, raps_lambda=0.05, raps_kreg=2)
    S = score_matrix(P, spec)
    for i in range(P.shape[0]):
        for y in range(6):
            assert S[i, y] == pytest.approx(class_score(P[i], y, spec), abs=1e-12)


def test_randomized_matrix_uses_one_draw_per_cell():
    P = np.full((3, 4), 0.25)
    spec = ScoreSpec(ScoreKind.APS, aps_randomized=True)
    S = score_matrix(P, spec, np.random.default_rng(7))
    U = np.random.default_rng(7).random((3, 4))
    expected = np.array([[class_score(P[i], y, spec, U[i, y]) for y in range(4)] for i in range(3)])
    np.testing.assert_allclose(S, expected, atol=1e-15)
    with pytest.raises(ValueError):
        score_matrix(P, spec)


def test_true_label_scores():
    P = np.array([[0.7, 0.3], [0.2, 0.8]])
    np.testing.assert_allclose(true_label_scores(P, [1, 1], ScoreSpec(ScoreKind.LAC)), [0.7, 0.2])
    with pytest.raises(ValueError):
        true_label_scores(P, [1], ScoreSpec(ScoreKind.LAC))
