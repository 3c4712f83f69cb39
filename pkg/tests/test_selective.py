import numpy as np
import pytest

from mmicp.selective import (
    SelectiveConfig,
    accuracy_rejection_curve,
    retained_count,
    run_selective,
    split_cal_test,
)
from mmicp.strategy import PAPER_STRATEGIES, Strategy, StrategyKind, parse_strategies


def test_retained_count():
    assert retained_count(100, 0.07) == 93
    assert retained_count(100, 0.0) == 100
    assert retained_count(1000, 0.99) == 10


def test_perfect_ranking_curve():
    correct = np.array([1, 1, 1, 0, 0], dtype=float)
    u = np.array([0.0, 0.1, 0.2, 0.8, 0.9])
    c = accuracy_rejection_curve(correct, u, grid=[0.0, 0.2, 0.4])
    np.testing.assert_allclose(c.accuracies, [0.6, 0.75, 1.0])
    assert c.auarc == pytest.approx((0.675 + 0.875) / 2)


def test_ties_reject_smaller_id_first():
    correct = np.array([0.0, 1.0])
    u = np.array([0.5, 0.5])
    assert accuracy_rejection_curve(correct, u, [0.0, 0.5]).accuracies[1] == 1.0
    assert accuracy_rejection_curve(correct, u, [0.0, 0.5], ids=[9, 3]).accuracies[1] == 0.0


def test_constant_curve_auarc_is_accuracy():
    c = accuracy_rejection_curve(np.ones(10), np.zeros(10))
    assert c.auarc == pytest.approx(1.0) and c.auarc_100 == pytest.approx(100.0)


def test_strategy_parsing():
    assert [s.name for s in parse_strategies(",".join(PAPER_STRATEGIES))] == list(PAPER_STRATEGIES)
    assert Strategy.parse("SIZE@0.3") == Strategy(StrategyKind.SET_SIZE, 0.3)
    for bad in ("size@1.5", "entropy"):
        with pytest.raises(ValueError):
            Strategy.parse(bad)


def test_strategy_uncertainty():
    P = np.array([[1.0, 0.5, 0.25], [1.0, 0.1, 0.1]])
    np.testing.assert_allclose(Strategy.parse("mmi_pi").uncertainty(P), [0.3125, 0.09])
    np.testing.assert_allclose(Strategy.parse("mmi_tv").uncertainty(P), [0.5, 0.1])
    np.testing.assert_allclose(Strategy.parse("size@0.2").uncertainty(P), [3, 1])
    with pytest.raises(ValueError):
        Strategy.parse("random").uncertainty(P)


def blob_probs(n=600, seed=0):
    rng = np.random.default_rng(seed)
    y = rng.integers(0, 4, size=n)
    logits = rng.normal(size=(n, 4)) + 2.0 * np.eye(4)[y]
    P = np.exp(logits)
    return P / P.sum(axis=1, keepdims=True), y


def test_run_selective_is_seeded_and_disjoint():
    P, y = blob_probs()
    cfg = SelectiveConfig(n_cal=300, n_test=200)
    cal, test = split_cal_test(600, cfg, 4)
    assert np.intersect1d(cal, test).size == 0
    a = run_selective(P, y, Strategy.parse("mmi_pi"), cfg, seed=4)
    b = run_selective(P, y, Strategy.parse("mmi_pi"), cfg, seed=4)
    assert a.curve.auarc == b.curve.auarc
    assert np.array_equal(a.test_ids, test)
    assert np.all(a.P_consonant.max(axis=1) == 1.0)
    assert len(a.reports([0.1])) == 200


def test_run_selective_errors():
    P, y = blob_probs(50)
    with pytest.raises(ValueError):
        run_selective(P, y, Strategy.parse("mmi_pi"), SelectiveConfig(n_cal=40, n_test=20))
    with pytest.raises(ValueError):
        run_selective(P, y, Strategy.parse("mmi_pi"), SelectiveConfig(10, 10), split=([0, 1, 2], [2, 3]))


def test_informative_ranking_beats_random():
    P, y = blob_probs(3000, seed=1)
    cfg = SelectiveConfig(n_cal=1000, n_test=1000)
    mmi = run_selective(P, y, Strategy.parse("mmi_pi"), cfg, seed=0).curve.auarc
    rnd = run_selective(P, y, Strategy.parse("random"), cfg, seed=0).curve.auarc
    assert mmi > rnd
