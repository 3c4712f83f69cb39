"""Selective classification: accuracy-rejection curves ranked by uncertainty."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import seeding
from .imprecise import mmi_pi_rows, mmi_tv_rows
from .scores import ScoreKind, ScoreSpec, check_probs, score_matrix, true_label_scores
from .strategy import Strategy
from .transducer import DEFAULT_JITTER, calibrate, consonant_rows, pvalue_matrix, set_sizes

DEFAULT_GRID = np.linspace(0.0, 0.99, 100)


@dataclass(frozen=True)
class SelectiveConfig:
    n_cal: int = 1000
    n_test: int = 1000
    score: ScoreSpec = field(default_factory=lambda: ScoreSpec(ScoreKind.APS))
    jitter_eps: float = DEFAULT_JITTER
    grid_points: int = 100
    max_rejection: float = 0.99

    def __post_init__(self):
        if self.n_cal < 1 or self.n_test < 1:
            raise ValueError("calibration and test sets must be non-empty")
        if self.grid_points < 2 or not 0.0 < self.max_rejection < 1.0:
            raise ValueError("invalid rejection grid")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.max_rejection, self.grid_points)


@dataclass
class ArcCurve:
    rejection_rates: np.ndarray
    accuracies: np.ndarray
    auarc: float

    @property
    def auarc_100(self) -> float:
        return 100.0 * self.auarc


def retained_count(n: int, r: float) -> int:
    # ceil((1 - r) n) with slack for values like (1 - 0.07) * 100 = 93.00000000000001
    return max(0, math.ceil((1.0 - r) * n - 1e-9))


def accuracy_rejection_curve(correct, uncertainty, grid=DEFAULT_GRID, ids=None) -> ArcCurve:
    """Reject the most uncertain fraction ``r`` for every ``r`` on ``grid``.

    Instances are ranked by descending uncertainty with ties going to
    the smaller id (so the smaller id is rejected first). ``auarc`` is
    the trapezoid area divided by the grid span, so a perfect curve
    scores 1.
    """
    correct = np.asarray(correct, dtype=float)
    u = np.asarray(uncertainty, dtype=float)
    n = correct.size
    if n == 0 or u.shape != correct.shape:
        raise ValueError("need one uncertainty per instance")
    ids = np.arange(n) if ids is None else np.asarray(ids)
    order = np.lexsort((ids, -u))  # most uncertain first
    kept_correct = correct[order][::-1]  # most certain first
    cum = np.cumsum(kept_correct)
    grid = np.asarray(grid, dtype=float)
    acc = np.empty(grid.size)
    for i, r in enumerate(grid):
        keep = retained_count(n, r)
        if keep == 0:
            raise ValueError(f"rejection rate {r} leaves no instances")
        acc[i] = cum[keep - 1] / keep
    span = grid[-1] - grid[0]
    area = float(np.trapezoid(acc, grid) / span) if span > 0 else float(acc[0])
    return ArcCurve(grid, acc, area)


@dataclass
class SelectiveResult:
    curve: ArcCurve
    test_ids: np.ndarray
    P_consonant: np.ndarray
    correct: np.ndarray

    def reports(self, alphas):
        """Per-instance (id, mmi_tv, mmi_pi, sizes...) tuples."""
        tv, pi = mmi_tv_rows(self.P_consonant), mmi_pi_rows(self.P_consonant)
        sizes = [set_sizes(self.P_consonant, a) for a in alphas]
        return [(int(i), float(tv[k]), float(pi[k]), *(int(s[k]) for s in sizes)) for k, i in enumerate(self.test_ids)]


def split_cal_test(n: int, config: SelectiveConfig, seed: int) -> tuple[np.ndarray, np.ndarray]:
    if config.n_cal + config.n_test > n:
        raise ValueError(f"{n} rows cannot hold n_cal={config.n_cal} + n_test={config.n_test}")
    perm = seeding.rng_for(seed, seeding.STREAM_SPLIT).permutation(n)
    return perm[: config.n_cal], perm[config.n_cal : config.n_cal + config.n_test]


def run_selective(
    proba,
    labels,
    strategy: Strategy,
    config: SelectiveConfig,
    seed: int = 0,
    split: tuple[np.ndarray, np.ndarray] | None = None,
) -> SelectiveResult:
    """Calibrate on one split, rank the other by uncertainty, build the ARC.

    Point predictions are the argmax of ``proba``. ``split`` overrides the
    seeded calibration/test split (row indices, used as canonical ids).
    """
    P = check_probs(np.atleast_2d(proba))
    y = np.asarray(labels, dtype=np.int64)
    if y.shape != (P.shape[0],):
        raise ValueError(f"{y.size} labels for {P.shape[0]} probability rows")
    cal_idx, test_idx = split if split is not None else split_cal_test(P.shape[0], config, seed)
    cal_idx, test_idx = np.asarray(cal_idx), np.asarray(test_idx)
    if np.intersect1d(cal_idx, test_idx).size:
        raise ValueError("calibration and test rows overlap")
    rng = seeding.rng_for(seed, seeding.STREAM_SCORE)
    cal_scores = true_label_scores(P[cal_idx], y[cal_idx], config.score, rng)
    cal = calibrate(cal_scores, config.jitter_eps, seeding.seed_for(seed, seeding.STREAM_JITTER))
    Pc = consonant_rows(pvalue_matrix(cal, score_matrix(P[test_idx], config.score, rng)))
    u = strategy.uncertainty(Pc, seeding.rng_for(seed, seeding.STREAM_RANDOM_EPU))
    correct = np.argmax(P[test_idx], axis=1) == y[test_idx]
    curve = accuracy_rejection_curve(correct, u, config.grid, ids=test_idx)
    return SelectiveResult(curve, test_idx, Pc, correct)
