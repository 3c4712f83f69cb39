import numpy as np
import pytest

from mmicp.active import ActiveConfig, PoolExhaustedError, run_active, split_indices
from mmicp.models import LearnerKind, LearnerSpec, make_blobs
from mmicp.strategy import Strategy

SMALL = ActiveConfig(n_initial=30, n_pool=60, n_test=50, rounds=5)


def test_split_disjoint():
    init, pool, test = split_indices(200, SMALL, seed=0)
    assert (init.size, pool.size, test.size) == (30, 60, 50)
    assert len(set(init) | set(pool) | set(test)) == 140


def test_run_shapes_and_determinism():
    data = make_blobs(200, K=3, seed=1)
    learner = LearnerSpec(LearnerKind.KNN, k=5)
    a = run_active(data, Strategy.parse("mmi_pi"), learner, SMALL, seed=3)
    b = run_active(data, Strategy.parse("mmi_pi"), learner, SMALL, seed=3)
    assert len(a.accuracies) == 6 and len(a.acquired) == 5
    assert a.accuracies == b.accuracies and a.acquired == b.acquired
    _, pool, _ = split_indices(200, SMALL, seed=3)
    assert set(a.acquired) <= set(pool) and len(set(a.acquired)) == 5
    assert '"strategy": "mmi_pi"' in a.to_json()


def test_pool_exhaustion():
    data = make_blobs(200, K=3, seed=1)
    cfg = ActiveConfig(n_initial=30, n_pool=3, n_test=50, rounds=5)
    with pytest.raises(PoolExhaustedError):
        run_active(data, Strategy.parse("mmi_pi"), LearnerSpec(), cfg)


def test_config_validation():
    with pytest.raises(ValueError):
        ActiveConfig(n_initial=1)
    with pytest.raises(ValueError):
        ActiveConfig(train_fraction=1.0)


def test_infinite_quantile_gives_tied_sizes():
    # with 9 calibration points, alpha = 0.01 puts k past n: every set is the full label space
    data = make_blobs(200, K=3, seed=1)
    cfg = ActiveConfig(n_initial=30, n_pool=60, n_test=50, rounds=1)
    run = run_active(data, Strategy.parse("size@0.01"), LearnerSpec(LearnerKind.KNN), cfg, seed=0)
    _, pool, _ = split_indices(200, cfg, 0)
    assert run.acquired == [int(pool[0])]
