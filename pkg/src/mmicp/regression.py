"""MMI-pi for conformal regression, computed per test instance.

Two routes, both driven by the calibration set and the instance's
prediction region rather than by a closed form in ``n_cal``:

* :func:`mmi_pi_grid` integrates ``alpha -> sup_{y outside C_alpha} pi(y)``
  on a midpoint grid in ``alpha``, probing the transducer just outside
  each region. This is the measure itself, up to the grid error
  (at most one cell width).
* :func:`mmi_pi_boundary_count` evaluates the counting form
  ``(1 + #{s_i >= inf_{y outside C_alpha} s(x, y)}) / (n_cal + 1)``
  exactly over the quantile steps, taking the infimum at the region
  boundary.

The two differ by exactly ``1/(n_cal+1)``: at the boundary the score
equals ``q_hat``, which is inside the region, so the counting form
includes one calibration score the transducer never reaches outside.
"""

from __future__ import annotations

import math

import numpy as np

from .scores import RegressionPrediction, ScoreKind, ScoreSpec, regression_score
from .transducer import CEIL_SLACK, CalibrationSet, conformal_pvalue, quantile, regression_interval

_PROBE_DECADES = 13


def _quantiles(cal: CalibrationSet, alphas: np.ndarray) -> np.ndarray:
    k = np.ceil((1.0 - alphas) * (cal.n_cal + 1) - CEIL_SLACK).astype(np.int64)
    padded = np.append(cal.scores, np.inf)
    return padded[np.minimum(k, cal.n_cal + 1) - 1]


def _region_bounds(pred: RegressionPrediction, q: np.ndarray, spec: ScoreSpec):
    """Array version of :func:`regression_interval` given quantiles."""
    kind = ScoreKind(spec.kind)
    if kind is ScoreKind.ABS_RESIDUAL:
        lo, hi = pred.point - q, pred.point + q
    elif kind is ScoreKind.WEIGHTED_RESIDUAL:
        lo, hi = pred.point - q * pred.weight, pred.point + q * pred.weight
    elif kind is ScoreKind.CQR:
        lo, hi = pred.lower_q - q, pred.upper_q + q
    else:
        raise ValueError(f"{kind.value} is not a regression score")
    empty = lo > hi
    return np.where(empty, np.nan, lo), np.where(empty, np.nan, hi)


def _scores(pred: RegressionPrediction, ys: np.ndarray, spec: ScoreSpec) -> np.ndarray:
    """Array version of :func:`regression_score`."""
    kind = ScoreKind(spec.kind)
    if kind is ScoreKind.ABS_RESIDUAL:
        return np.abs(ys - pred.point)
    if kind is ScoreKind.WEIGHTED_RESIDUAL:
        return np.abs(ys - pred.point) / pred.weight
    return np.maximum(pred.lower_q - ys, ys - pred.upper_q)


def min_score(pred: RegressionPrediction, spec: ScoreSpec) -> float:
    """Smallest score over all targets: 0 for residuals, minus the CQR half-band."""
    kind = ScoreKind(spec.kind)
    if kind is ScoreKind.CQR:
        return -(pred.upper_q - pred.lower_q) / 2.0
    if kind in (ScoreKind.ABS_RESIDUAL, ScoreKind.WEIGHTED_RESIDUAL):
        return 0.0
    raise ValueError(f"{kind.value} is not a regression score")


def is_consonant(cal: CalibrationSet, pred: RegressionPrediction, spec: ScoreSpec) -> bool:
    """Whether the raw transducer reaches 1 somewhere.

    That needs a target scoring at or below the smallest calibration
    score. A CQR band narrower than ``-2 s_(1)`` fails this, its regions
    go empty for large ``alpha`` and the constant-MMI result does not
    apply to it.
    """
    return bool(min_score(pred, spec) <= cal.scores[0])


def sup_outside(cal: CalibrationSet, pred: RegressionPrediction, alpha: float, spec: ScoreSpec) -> float:
    """Largest p-value at probe points outside ``C_alpha``; 0 if none exist.

    Probes sit at ``13`` geometrically shrinking offsets beyond each end
    of the region; the transducer is monotone away from the region, so
    the nearest probe attains the supremum once it falls below the gap
    to the next calibration score.
    """
    return float(_sup_outside_many(cal, pred, np.array([alpha]), spec)[0])


def _sup_outside_many(cal, pred, alphas, spec) -> np.ndarray:
    q = _quantiles(cal, alphas)
    lo, hi = _region_bounds(pred, q, spec)
    out = np.zeros(alphas.size)
    unbounded = np.isinf(q)
    empty = np.isnan(lo) & ~unbounded
    out[empty] = 1.0  # every target is excluded, including the best one
    ok = ~unbounded & ~empty
    if not ok.any():
        return out
    lo_, hi_ = lo[ok], hi[ok]
    scale = np.maximum.reduce([hi_ - lo_, np.abs(lo_), np.abs(hi_), np.ones_like(lo_)])
    offsets = scale[:, None] * 10.0 ** -np.arange(_PROBE_DECADES, dtype=float)[None, :]
    ys = np.concatenate([lo_[:, None] - offsets, hi_[:, None] + offsets], axis=1)
    outside = (ys < lo_[:, None]) | (ys > hi_[:, None])
    pv = np.asarray(conformal_pvalue(cal, _scores(pred, ys, spec)))
    out[ok] = np.max(np.where(outside, pv, 0.0), axis=1)
    return out


def mmi_pi_grid(cal: CalibrationSet, pred: RegressionPrediction, spec: ScoreSpec, cells: int = 1000) -> float:
    alphas = (np.arange(cells) + 0.5) / cells
    return float(np.mean(_sup_outside_many(cal, pred, alphas, spec)))


def mmi_pi_boundary_count(cal: CalibrationSet, pred: RegressionPrediction, spec: ScoreSpec) -> float:
    """Counting form, exact: the integrand only changes at ``alpha = j/(n+1)``."""
    m = cal.n_cal + 1
    total = 0.0
    for j in range(1, m + 1):
        a = (j - 0.5) / m  # interior point of ((j-1)/m, j/m)
        q = quantile(cal, a)
        if math.isinf(q):
            inf_score = math.inf
        else:
            _, hi = regression_interval(cal, pred, a, spec).interval
            # the boundary score is q_hat up to rounding in (point + q) - point
            inf_score = regression_score(pred, hi, spec) - 1e-12 * max(1.0, abs(q))
        n_ge = int(np.sum(cal.scores >= inf_score))
        total += (1.0 + n_ge) / m / m
    return total
