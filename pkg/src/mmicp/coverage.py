"""Monte Carlo checks of marginal coverage and uniform validity.

Each trial draws a fresh exchangeable calibration set plus one test point,
calibrates, and records the test label's raw and consonant p-values.
Coverage of ``C_alpha`` is ``P(pi(Y) > alpha)``; uniform validity asks
``P(pi~(Y) <= alpha) <= alpha`` for the consonant transducer ``pi~``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import seeding
from .scores import ScoreSpec, score_matrix, true_label_scores
from .transducer import DEFAULT_JITTER, calibrate, consonant_rows, pvalue_matrix

ALPHA_GRID = tuple(round(0.05 * i, 2) for i in range(1, 11))


@dataclass(frozen=True)
class BlobModel:
    """Gaussian-blob classes with their exact Bayes posterior as the model.

    Using the true posterior keeps the Monte Carlo free of any training
    step; exchangeability is all the guarantees need.
    """

    centers: np.ndarray
    noise: float = 1.0

    @classmethod
    def random(cls, K: int = 10, d: int = 2, spread: float = 2.0, seed: int = 0) -> "BlobModel":
        return cls(np.random.default_rng(seed).normal(scale=spread, size=(K, d)))

    @property
    def K(self) -> int:
        return self.centers.shape[0]

    def sample(self, n: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
        y = rng.integers(self.K, size=n)
        X = self.centers[y] + self.noise * rng.normal(size=(n, self.centers.shape[1]))
        return X, y

    def proba(self, X) -> np.ndarray:
        d2 = ((np.asarray(X)[:, None, :] - self.centers[None, :, :]) ** 2).sum(-1)
        logits = -d2 / (2 * self.noise**2)
        logits -= logits.max(axis=1, keepdims=True)
        E = np.exp(logits)
        return E / E.sum(axis=1, keepdims=True)


@dataclass
class CoverageRow:
    n_cal: int
    alpha: float
    trials: int
    coverage_raw: float
    coverage_consonant: float
    invalid_freq: float  # P(consonant pi(Y) <= alpha)
    sigma: float

    @property
    def coverage_ok(self) -> bool:
        floor = 1 - self.alpha - 3 * self.sigma
        return self.coverage_raw >= floor and self.coverage_consonant >= floor

    @property
    def validity_ok(self) -> bool:
        return self.invalid_freq <= self.alpha + 3 * self.sigma


def true_label_pvalues(model: BlobModel, n_cal: int, trials: int, spec: ScoreSpec, seed: int = 0,
                       jitter_eps: float = DEFAULT_JITTER) -> tuple[np.ndarray, np.ndarray]:
    """Raw and consonant p-value of the test label, one per trial."""
    raw = np.empty(trials)
    cons = np.empty(trials)
    for t in range(trials):
        rng = seeding.rng_for(seed, seeding.STREAM_DATA, t)
        X, y = model.sample(n_cal + 1, rng)
        P = model.proba(X)
        cal_scores = true_label_scores(P[:n_cal], y[:n_cal], spec, rng)
        cal = calibrate(cal_scores, jitter_eps, seeding.seed_for(seed, seeding.STREAM_JITTER, t))
        pv = pvalue_matrix(cal, score_matrix(P[n_cal:], spec, rng))
        raw[t] = pv[0, y[n_cal]]
        cons[t] = consonant_rows(pv)[0, y[n_cal]]
    return raw, cons


def proba_true_label_pvalues(proba, labels, n_cal: int, trials: int, spec: ScoreSpec, seed: int = 0,
                             jitter_eps: float = DEFAULT_JITTER) -> tuple[np.ndarray, np.ndarray]:
    """Same as :func:`true_label_pvalues`, resampling rows of a fixed dataset."""
    P_all = np.asarray(proba, dtype=float)
    y_all = np.asarray(labels, dtype=np.int64)
    if n_cal + 1 > P_all.shape[0]:
        raise ValueError("dataset too small for the requested calibration size")
    raw = np.empty(trials)
    cons = np.empty(trials)
    for t in range(trials):
        rng = seeding.rng_for(seed, seeding.STREAM_DATA, t)
        idx = rng.choice(P_all.shape[0], size=n_cal + 1, replace=False)
        P, y = P_all[idx], y_all[idx]
        cal = calibrate(true_label_scores(P[:n_cal], y[:n_cal], spec, rng), jitter_eps,
                        seeding.seed_for(seed, seeding.STREAM_JITTER, t))
        pv = pvalue_matrix(cal, score_matrix(P[n_cal:], spec, rng))
        raw[t] = pv[0, y[n_cal]]
        cons[t] = consonant_rows(pv)[0, y[n_cal]]
    return raw, cons


def coverage_table(raw: np.ndarray, cons: np.ndarray, n_cal: int, alphas=ALPHA_GRID) -> list[CoverageRow]:
    rows = []
    trials = raw.size
    for a in alphas:
        sigma = math.sqrt(a * (1 - a) / trials)
        rows.append(CoverageRow(
            n_cal, float(a), trials,
            float(np.mean(raw > a)), float(np.mean(cons > a)), float(np.mean(cons <= a)), sigma,
        ))
    return rows
