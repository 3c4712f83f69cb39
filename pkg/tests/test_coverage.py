import numpy as np

from mmicp.coverage import BlobModel, coverage_table, proba_true_label_pvalues, true_label_pvalues
from mmicp.scores import ScoreSpec


def test_small_monte_carlo_is_valid():
    model = BlobModel.random(K=5, seed=0)
    raw, cons = true_label_pvalues(model, 20, 1500, ScoreSpec(), seed=1)
    assert np.all(cons >= raw)
    for row in coverage_table(raw, cons, 20):
        assert row.coverage_ok and row.validity_ok, row


def test_dataset_resampling():
    model = BlobModel.random(K=3, seed=0)
    X, y = model.sample(300, np.random.default_rng(0))
    raw, cons = proba_true_label_pvalues(model.proba(X), y, 30, 200, ScoreSpec(), seed=2)
    assert raw.shape == (200,) and np.all((raw > 0) & (raw <= 1))


def test_reproducible():
    model = BlobModel.random(K=3, seed=0)
    a = true_label_pvalues(model, 10, 50, ScoreSpec(), seed=5)
    b = true_label_pvalues(model, 10, 50, ScoreSpec(), seed=5)
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])
