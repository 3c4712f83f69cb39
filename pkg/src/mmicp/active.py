"""Pool-based active learning driven by conformal uncertainty."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .models import Dataset, LearnerSpec, fit
from .scores import ScoreKind, ScoreSpec, score_matrix, true_label_scores
from .strategy import Strategy
from .transducer import DEFAULT_JITTER, calibrate, consonant_rows, pvalue_matrix


class PoolExhaustedError(RuntimeError):
    pass


@dataclass(frozen=True)
class ActiveConfig:
    n_initial: int = 100
    n_pool: int = 2000
    n_test: int = 1000
    rounds: int = 300
    train_fraction: float = 0.7
    score: ScoreSpec = field(default_factory=lambda: ScoreSpec(ScoreKind.APS))
    jitter_eps: float = DEFAULT_JITTER

    def __post_init__(self):
        if self.rounds < 0:
            raise ValueError("rounds must be >= 0")
        if not 0.0 < self.train_fraction < 1.0:
            raise ValueError("train_fraction must lie in (0, 1)")
        n_fit = int(round(self.train_fraction * self.n_initial))
        if self.n_initial < 2 or n_fit < 1 or n_fit >= self.n_initial:
            raise ValueError("initial labelled set too small for a train/calibration split")
        if self.n_test < 1:
            raise ValueError("need a non-empty test set")


@dataclass
class ExperimentRun:
    seed: int
    strategy: str
    rounds: int
    accuracies: list[float]
    acquired: list[int]

    def to_json(self) -> str:
        return json.dumps(
            {
                "seed": self.seed,
                "strategy": self.strategy,
                "rounds": self.rounds,
                "accuracies": self.accuracies,
                "acquired": self.acquired,
            },
            indent=1,
        )


def split_indices(n: int, config: ActiveConfig, seed: int) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Disjoint (initial, pool, test) index arrays from a seeded permutation.

    A pool size of 0 (or larger than what is left) means "everything not
    used for the initial and test sets".
    """
    need = config.n_initial + config.n_test
    if need >= n:
        raise ValueError(f"dataset of {n} rows cannot hold {need} initial+test rows and a pool")
    perm = seeding.rng_for(seed, seeding.STREAM_SPLIT).permutation(n)
    init = perm[: config.n_initial]
    test = perm[config.n_initial : need]
    rest = perm[need:]
    pool = rest if config.n_pool <= 0 else rest[: config.n_pool]
    return init, pool, test


def _uncertainty(learner, data: Dataset, fit_idx, cal_idx, pool, strategy, config, seed, rnd):
    spec = config.score
    score_rng = seeding.rng_for(seed, seeding.STREAM_ROUND, rnd, seeding.STREAM_SCORE)
    cal_scores = true_label_scores(learner.predict_proba(data.features[cal_idx]), data.labels[cal_idx], spec, score_rng)
    cal = calibrate(cal_scores, config.jitter_eps, seeding.seed_for(seed, seeding.STREAM_ROUND, rnd, seeding.STREAM_JITTER))
    P = consonant_rows(pvalue_matrix(cal, score_matrix(learner.predict_proba(data.features[pool]), spec, score_rng)))
    epu_rng = seeding.rng_for(seed, seeding.STREAM_ROUND, rnd, seeding.STREAM_RANDOM_EPU)
    return strategy.uncertainty(P, epu_rng)


def run_active(
    data: Dataset,
    strategy: Strategy,
    learner: LearnerSpec,
    config: ActiveConfig,
    seed: int = 0,
) -> ExperimentRun:
    """Acquire one label per round from the pool, most uncertain first.

    Each round re-splits the labelled set into fit/calibration parts
    (``train_fraction`` / rest) with a round-specific seed, fits the
    learner, records held-out accuracy, then moves the pool instance
    with the largest uncertainty (earliest pool position on ties) into
    the labelled set. ``accuracies`` has ``rounds + 1`` entries.
    """
    init, pool, test = split_indices(len(data), config, seed)
    if pool.size < config.rounds:
        raise PoolExhaustedError(f"pool of {pool.size} cannot supply {config.rounds} rounds")
    labelled = list(init)
    pool = list(pool)
    test_X, test_y = data.features[test], data.labels[test]
    accuracies: list[float] = []
    acquired: list[int] = []
    for rnd in range(config.rounds + 1):
        lab = np.asarray(labelled)
        perm = seeding.rng_for(seed, seeding.STREAM_ROUND, rnd, seeding.STREAM_SPLIT).permutation(lab.size)
        n_fit = int(round(config.train_fraction * lab.size))
        fit_idx, cal_idx = lab[perm[:n_fit]], lab[perm[n_fit:]]
        model = fit(learner, data.subset(fit_idx))
        accuracies.append(float(np.mean(np.argmax(model.predict_proba(test_X), axis=1) == test_y)))
        if rnd == config.rounds:
            break
        u = _uncertainty(model, data, fit_idx, cal_idx, np.asarray(pool), strategy, config, seed, rnd)
        pick = int(np.argmax(u))  # first maximiser = lowest pool position
        acquired.append(int(pool.pop(pick)))
        labelled.append(acquired[-1])
    return ExperimentRun(seed, strategy.name, config.rounds, accuracies, acquired)
