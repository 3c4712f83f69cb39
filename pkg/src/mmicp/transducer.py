"""Split-conformal calibration, conformal p-values and prediction regions."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .scores import RegressionPrediction, ScoreKind, ScoreSpec, regression_score

DEFAULT_JITTER = 1e-9
# slack for (1 - alpha)(n + 1) landing a hair above an integer in floating point
CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class CalibrationSet:
    """Sorted, tie-free calibration scores.

    Build it with :func:`calibrate`; the constructor only validates.
    """

    scores: np.ndarray
    jitter_eps: float
    seed: int

    def __post_init__(self):
        s = np.array(self.scores, dtype=float)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("calibration scores must be a non-empty 1-d array")
        if np.any(np.diff(s) <= 0):
            raise ValueError("calibration scores must be strictly increasing")
        s.setflags(write=False)
        object.__setattr__(self, "scores", s)

    @property
    def n_cal(self) -> int:
        return int(self.scores.size)

    def to_json(self) -> str:
        return json.dumps(
            {"scores": [float(v) for v in self.scores], "jitter_eps": self.jitter_eps, "seed": self.seed},
            indent=1,
        )

    @classmethod
    def from_json(cls, text: str) -> "CalibrationSet":
        d = json.loads(text)
        return cls(np.asarray(d["scores"], dtype=float), float(d["jitter_eps"]), int(d["seed"]))


def calibrate(raw_scores, jitter_eps: float = DEFAULT_JITTER, seed: int = 0) -> CalibrationSet:
    """Jitter, sort and freeze calibration scores.

    Each score gets ``eps * u_i`` added with ``u_i ~ U[0, 1]`` drawn from
    ``np.random.default_rng(seed)``; ``eps`` is ``jitter_eps`` scaled by
    the score range (or ``jitter_eps`` itself for a zero-range or
    sub-unit range).
    """
    s = np.asarray(raw_scores, dtype=float).ravel()
    if s.size == 0:
        raise ValueError("cannot calibrate on an empty score list")
    if not jitter_eps > 0:
        raise ValueError("jitter_eps must be positive")
    if not np.all(np.isfinite(s)):
        raise ValueError("calibration scores must be finite")
    span = float(s.max() - s.min())
    eps = jitter_eps * max(span, 1.0)
    u = np.random.default_rng(seed).random(s.size)
    out = np.sort(s + eps * u)
    # float collisions after jitter are possible for huge magnitudes; step up one ulp
    for i in range(1, out.size):
        if out[i] <= out[i - 1]:
            out[i] = np.nextafter(out[i - 1], np.inf)
    return CalibrationSet(out, float(jitter_eps), int(seed))


def quantile_index(n_cal: int, alpha: float) -> int:
    """``k = ceil((1 - alpha)(n_cal + 1))``."""
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    return math.ceil((1.0 - alpha) * (n_cal + 1) - CEIL_SLACK)


def quantile(cal: CalibrationSet, alpha: float) -> float:
    """k-th smallest calibration score, or ``inf`` when k exceeds n_cal."""
    k = quantile_index(cal.n_cal, alpha)
    if k > cal.n_cal:
        return math.inf
    return float(cal.scores[k - 1])


def conformal_pvalue(cal: CalibrationSet, test_score):
    """``(1 + #{s_i >= test_score}) / (1 + n_cal)``; vectorised over arrays."""
    t = np.asarray(test_score, dtype=float)
    n_ge = cal.n_cal - np.searchsorted(cal.scores, t, side="left")
    p = (1.0 + n_ge) / (1.0 + cal.n_cal)
    return float(p) if p.ndim == 0 else p


@dataclass(frozen=True)
class PValueProfile:
    pvalues: np.ndarray
    consonant: bool = False
    top_label: int | None = None

    def __post_init__(self):
        p = np.array(self.pvalues, dtype=float)
        if p.ndim != 1 or p.size == 0:
            raise ValueError("a profile needs at least one label")
        if np.any(p < 0) or np.any(p > 1):
            raise ValueError("p-values must lie in [0, 1]")
        if self.consonant:
            if self.top_label is None or p[self.top_label] != 1.0:
                raise ValueError("consonant profile must attain 1 at top_label")
        p.setflags(write=False)
        object.__setattr__(self, "pvalues", p)

    @property
    def K(self) -> int:
        return int(self.pvalues.size)


def profile(cal: CalibrationSet, test_scores) -> PValueProfile:
    s = np.asarray(test_scores, dtype=float).ravel()
    if s.size == 0:
        raise ValueError("need one score per label")
    return PValueProfile(np.atleast_1d(conformal_pvalue(cal, s)))


def top_label_of(pvalues) -> int:
    # np.argmax returns the first maximiser, i.e. the lowest label index on ties
    return int(np.argmax(pvalues))


def enforce_consonance(p: PValueProfile) -> PValueProfile:
    """Stretch the largest p-value to 1 (ties resolved to the lowest label)."""
    top = top_label_of(p.pvalues)
    out = p.pvalues.copy()
    out[top] = 1.0
    return PValueProfile(out, consonant=True, top_label=top)


@dataclass(frozen=True)
class PredictionSet:
    alpha: float
    labels: frozenset = field(default_factory=frozenset)
    interval: tuple[float, float] | None = None

    @property
    def size(self) -> float:
        if self.interval is not None:
            return self.interval[1] - self.interval[0]
        return len(self.labels)

    @property
    def bounded(self) -> bool:
        return self.interval is None or all(math.isfinite(v) for v in self.interval)


def prediction_set(p: PValueProfile, alpha: float) -> PredictionSet:
    """Labels whose p-value is strictly greater than ``alpha``."""
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    return PredictionSet(alpha, frozenset(int(i) for i in np.flatnonzero(p.pvalues > alpha)))


def regression_interval(
    cal: CalibrationSet, pred: RegressionPrediction, alpha: float, spec: ScoreSpec
) -> PredictionSet:
    """Invert a regression score at the calibration quantile.

    An infinite quantile yields ``(-inf, inf)``; check ``.bounded``.
    """
    q = quantile(cal, alpha)
    kind = ScoreKind(spec.kind)
    if kind is ScoreKind.ABS_RESIDUAL:
        lo, hi = pred.point - q, pred.point + q
    elif kind is ScoreKind.WEIGHTED_RESIDUAL:
        lo, hi = pred.point - q * pred.weight, pred.point + q * pred.weight
    elif kind is ScoreKind.CQR:
        lo, hi = pred.lower_q - q, pred.upper_q + q
    else:
        raise ValueError(f"{kind.value} is not a regression score")
    if lo > hi:
        # CQR with a negative quantile wider than the quantile band: empty region
        return PredictionSet(alpha, interval=(math.nan, math.nan))
    return PredictionSet(alpha, interval=(float(lo), float(hi)))


def regression_pvalue(cal: CalibrationSet, pred: RegressionPrediction, y, spec: ScoreSpec):
    """Conformal transducer of a regression prediction evaluated at ``y``."""
    ys = np.atleast_1d(np.asarray(y, dtype=float))
    s = np.array([regression_score(pred, float(v), spec) for v in ys])
    p = conformal_pvalue(cal, s)
    return float(p[0]) if np.ndim(y) == 0 else p


def regression_grid(
    cal: CalibrationSet, pred: RegressionPrediction, spec: ScoreSpec, resolution: int = 1001, margin: float = 0.25
) -> tuple[np.ndarray, np.ndarray]:
    """Transducer evaluated on an evenly spaced grid of targets.

    The grid covers the region at the largest calibration score, widened
    by ``margin`` of its half-width on each side. Meant for plots and
    validation, not for computing measures.
    """
    smax = float(cal.scores[-1])
    kind = ScoreKind(spec.kind)
    if kind is ScoreKind.ABS_RESIDUAL:
        lo, hi = pred.point - smax, pred.point + smax
    elif kind is ScoreKind.WEIGHTED_RESIDUAL:
        lo, hi = pred.point - smax * pred.weight, pred.point + smax * pred.weight
    else:
        lo, hi = pred.lower_q - smax, pred.upper_q + smax
    half = max((hi - lo) / 2.0, 1e-12)
    ys = np.linspace(lo - margin * half, hi + margin * half, resolution)
    return ys, regression_pvalue(cal, pred, ys, spec)


# batch helpers used by the harnesses -------------------------------------------------


def pvalue_matrix(cal: CalibrationSet, S) -> np.ndarray:
    """Raw p-values for a score matrix of shape ``(n, K)``."""
    return np.asarray(conformal_pvalue(cal, np.asarray(S, dtype=float)))


def consonant_rows(P) -> np.ndarray:
    """Row-wise stretching of the largest p-value to 1."""
    P = np.array(P, dtype=float, copy=True)
    P[np.arange(P.shape[0]), np.argmax(P, axis=1)] = 1.0
    return P


def set_sizes(P, alpha: float) -> np.ndarray:
    return np.sum(np.asarray(P) > alpha, axis=1)
