"""Nonconformity scores for classification and regression.

Classification scores take a probability vector and a candidate label;
regression scores take a point/quantile prediction and a real target.
Batch variants compute the full ``(n, K)`` score matrix used by the
harnesses.
"""

from __future__ import annotations

import enum
from dataclasses import asdict, dataclass

import numpy as np

PROB_TOL = 1e-9


class ScoreKind(str, enum.Enum):
    LAC = "LAC"
    APS = "APS"
    RAPS = "RAPS"
    MARGIN = "MARGIN"
    ABS_RESIDUAL = "ABS_RESIDUAL"
    WEIGHTED_RESIDUAL = "WEIGHTED_RESIDUAL"
    CQR = "CQR"

    @property
    def is_regression(self) -> bool:
        return self in (ScoreKind.ABS_RESIDUAL, ScoreKind.WEIGHTED_RESIDUAL, ScoreKind.CQR)


CLASSIFICATION_KINDS = (ScoreKind.LAC, ScoreKind.APS, ScoreKind.RAPS, ScoreKind.MARGIN)


@dataclass(frozen=True)
class ScoreSpec:
    """Which score to use, plus the RAPS / randomisation knobs.

    ``raps_lambda`` and ``raps_kreg`` only matter for RAPS;
    ``aps_randomized`` only for APS and RAPS.
    """

    kind: ScoreKind = ScoreKind.APS
    raps_lambda: float = 0.0
    raps_kreg: int = 1
    aps_randomized: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", ScoreKind(self.kind))
        if self.raps_lambda < 0:
            raise ValueError(f"raps_lambda must be >= 0, got {self.raps_lambda}")
        if self.raps_kreg < 1:
            raise ValueError(f"raps_kreg must be >= 1, got {self.raps_kreg}")

    @property
    def randomized(self) -> bool:
        return self.aps_randomized and self.kind in (ScoreKind.APS, ScoreKind.RAPS)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["kind"] = self.kind.value
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ScoreSpec":
        return cls(
            kind=ScoreKind(d["kind"]),
            raps_lambda=float(d.get("raps_lambda", 0.0)),
            raps_kreg=int(d.get("raps_kreg", 1)),
            aps_randomized=bool(d.get("aps_randomized", False)),
        )


@dataclass(frozen=True)
class RegressionPrediction:
    point: float
    weight: float = 1.0
    lower_q: float | None = None
    upper_q: float | None = None

    def __post_init__(self):
        if self.lower_q is None:
            object.__setattr__(self, "lower_q", self.point)
        if self.upper_q is None:
            object.__setattr__(self, "upper_q", self.point)
        if not self.weight > 0:
            raise ValueError(f"weight must be positive, got {self.weight}")
        if self.lower_q > self.upper_q:
            raise ValueError("lower_q must not exceed upper_q")


def check_probs(p) -> np.ndarray:
    """Validate a probability vector (or a matrix of row vectors)."""
    p = np.asarray(p, dtype=float)
    if p.ndim not in (1, 2) or p.shape[-1] < 2:
        raise ValueError(f"expected probabilities over K >= 2 classes, got shape {p.shape}")
    if np.any(p < 0) or not np.all(np.isfinite(p)):
        raise ValueError("probabilities must be finite and non-negative")
    if np.any(np.abs(p.sum(axis=-1) - 1.0) > PROB_TOL):
        raise ValueError("probabilities must sum to 1")
    return p


def _check_label(p: np.ndarray, y) -> int:
    if isinstance(y, (bool, np.bool_)) or int(y) != y or not 0 <= y < p.shape[-1]:
        raise IndexError(f"class index {y!r} out of range for K={p.shape[-1]}")
    return int(y)


def lac_score(p, y) -> float:
    p = check_probs(p)
    y = _check_label(p, y)
    return float(1.0 - p[y])


def _descending_order(p: np.ndarray) -> np.ndarray:
    # stable sort on -p: equal probabilities keep ascending class index
    return np.argsort(-p, kind="stable")


def _rank(p: np.ndarray, y: int) -> int:
    """1-based position of ``y`` in the descending-probability order."""
    return int(np.flatnonzero(_descending_order(p) == y)[0]) + 1


def aps_score(p, y, u: float | None = None) -> float:
    """Adaptive prediction set score.

    Mass of every class ranked strictly above ``y`` plus ``u * p[y]``
    (``u = 1`` when not randomised).
    """
    p = check_probs(p)
    y = _check_label(p, y)
    if u is None:
        u = 1.0
    elif not 0.0 <= u <= 1.0:
        raise ValueError(f"u must lie in [0, 1], got {u}")
    order = _descending_order(p)
    pos = int(np.flatnonzero(order == y)[0])
    above = float(np.sum(p[order[:pos]]))
    return above + u * float(p[y])


def raps_score(p, y, u: float | None = None, spec: ScoreSpec | None = None) -> float:
    spec = spec or ScoreSpec(ScoreKind.RAPS)
    if spec.kind is not ScoreKind.RAPS:
        raise ValueError("raps_score requires a RAPS spec")
    base = aps_score(p, y, u)
    rank = _rank(np.asarray(p, dtype=float), int(y))
    return base + spec.raps_lambda * max(0, rank - spec.raps_kreg)


def margin_score(p, y) -> float:
    """Best competing class probability minus the probability of ``y``."""
    p = check_probs(p)
    y = _check_label(p, y)
    others = np.delete(p, y)
    return float(others.max() - p[y])


def regression_score(pred: RegressionPrediction, y: float, spec: ScoreSpec) -> float:
    kind = ScoreKind(spec.kind)
    if kind is ScoreKind.ABS_RESIDUAL:
        return abs(y - pred.point)
    if kind is ScoreKind.WEIGHTED_RESIDUAL:
        if not pred.weight > 0:
            raise ValueError("weighted residual needs a positive weight")
        return abs(y - pred.point) / pred.weight
    if kind is ScoreKind.CQR:
        return max(pred.lower_q - y, y - pred.upper_q)
    raise ValueError(f"{kind.value} is not a regression score")


def class_score(p, y, spec: ScoreSpec, u: float | None = None) -> float:
    """Dispatch a single classification score by ``spec.kind``."""
    kind = spec.kind
    if kind is ScoreKind.LAC:
        return lac_score(p, y)
    if kind is ScoreKind.APS:
        return aps_score(p, y, u if spec.randomized else None)
    if kind is ScoreKind.RAPS:
        return raps_score(p, y, u if spec.randomized else None, spec)
    if kind is ScoreKind.MARGIN:
        return margin_score(p, y)
    raise ValueError(f"{kind.value} is not a classification score")


def score_matrix(proba, spec: ScoreSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    """Scores of every label for every row of ``proba``, shape ``(n, K)``.

    When the score spec is randomised, one uniform draw per (instance, label)
    is taken from ``rng``, row-major.
    """
    P = check_probs(np.atleast_2d(proba))
    n, K = P.shape
    kind = spec.kind
    if kind is ScoreKind.LAC:
        return 1.0 - P
    if kind is ScoreKind.MARGIN:
        # best competitor: the top class unless y is the top class itself
        order = _descending_order_rows(P)
        top = P[np.arange(n), order[:, 0]]
        second = P[np.arange(n), order[:, 1]]
        best_other = np.where(np.arange(K)[None, :] == order[:, :1], second[:, None], top[:, None])
        return best_other - P
    if kind in (ScoreKind.APS, ScoreKind.RAPS):
        if spec.randomized:
            if rng is None:
                raise ValueError("randomised scores need an rng")
            U = rng.random((n, K))
        else:
            U = np.ones((n, K))
        order = _descending_order_rows(P)
        sorted_p = np.take_along_axis(P, order, axis=1)
        above_sorted = np.cumsum(sorted_p, axis=1) - sorted_p
        above = np.empty_like(P)
        np.put_along_axis(above, order, above_sorted, axis=1)
        S = above + U * P
        if kind is ScoreKind.RAPS:
            ranks = np.empty((n, K), dtype=np.int64)
            np.put_along_axis(ranks, order, np.broadcast_to(np.arange(1, K + 1), (n, K)), axis=1)
            S = S + spec.raps_lambda * np.maximum(0, ranks - spec.raps_kreg)
        return S
    raise ValueError(f"{kind.value} is not a classification score")


def true_label_scores(proba, labels, spec: ScoreSpec, rng: np.random.Generator | None = None) -> np.ndarray:
    """Score of the observed label for each row (calibration scores)."""
    S = score_matrix(proba, spec, rng)
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (S.shape[0],):
        raise ValueError("one label per probability row required")
    if np.any(labels < 0) or np.any(labels >= S.shape[1]):
        raise IndexError("label out of range")
    return S[np.arange(S.shape[0]), labels]


def _descending_order_rows(P: np.ndarray) -> np.ndarray:
    return np.argsort(-P, axis=1, kind="stable")
