"""Plausibility measures induced by consonant transducers, and MMI.

A consonant p-value profile ``pi`` defines the maxitive upper probability
``upper(A) = max_{y in A} pi(y)`` (0 on the empty set) and its conjugate
``lower(A) = 1 - upper(A^c)``. Everything here is exact and linear (or
``K log K``) in the number of labels; the exponential reference versions
live in :mod:`mmicp.oracle`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .transducer import PValueProfile, enforce_consonance, prediction_set


@dataclass(frozen=True)
class PlausibilityMeasure:
    profile: PValueProfile

    def __post_init__(self):
        if not self.profile.consonant:
            raise ValueError("a plausibility measure needs a consonant profile")

    @classmethod
    def from_pvalues(cls, pvalues) -> "PlausibilityMeasure":
        """Wrap raw p-values, stretching the largest to 1 if needed."""
        return cls(enforce_consonance(PValueProfile(pvalues)))

    @property
    def pvalues(self) -> np.ndarray:
        return self.profile.pvalues

    @property
    def K(self) -> int:
        return self.profile.K

    def _mask(self, A) -> np.ndarray:
        mask = np.zeros(self.K, dtype=bool)
        idx = list(A)
        if idx:
            idx = np.asarray(idx, dtype=np.int64)
            if np.any(idx < 0) or np.any(idx >= self.K):
                raise IndexError("subset contains labels outside the label space")
            mask[idx] = True
        return mask


def upper_prob(m: PlausibilityMeasure, A) -> float:
    mask = m._mask(A)
    return float(m.pvalues[mask].max()) if mask.any() else 0.0


def lower_prob(m: PlausibilityMeasure, A) -> float:
    mask = m._mask(A)
    rest = m.pvalues[~mask]
    return 1.0 - (float(rest.max()) if rest.size else 0.0)


def ihdr(m: PlausibilityMeasure, alpha: float) -> frozenset:
    """Smallest label set whose lower probability reaches ``1 - alpha``.

    Labels are added in descending p-value order until the largest
    p-value left outside is at most ``alpha``. Any feasible set must
    contain every label with ``pi > alpha`` (otherwise the complement's
    sup exceeds ``alpha``), and that set is feasible, so the greedy
    stopping point is the unique minimum.
    """
    if not 0.0 <= alpha < 1.0:
        raise ValueError(f"alpha must lie in [0, 1), got {alpha}")
    order = np.argsort(-m.pvalues, kind="stable")
    chosen: list[int] = []
    for i, y in enumerate(order):
        # lower(chosen) >= 1 - alpha  <=>  upper(rest) <= alpha, compared without rounding 1 - x
        if upper_prob(m, order[i:]) <= alpha:
            break
        chosen.append(int(y))
    return frozenset(chosen)


def _sorted_desc(pvalues) -> np.ndarray:
    return np.sort(np.asarray(pvalues, dtype=float))[::-1]


def mmi_tv(m: PlausibilityMeasure) -> float:
    """MMI over indicator test functions: the second-largest p-value."""
    if m.K < 2:
        raise ValueError("MMI-TV needs at least two labels")
    return float(_sorted_desc(m.pvalues)[1])


def mmi_pi(m: PlausibilityMeasure) -> float:
    """MMI with the transducer itself as test function (closed form).

    ``sum_{k=2}^{K+1} (pi_(k-1) - pi_(k)) * pi_(k)`` over p-values sorted
    in descending order, with ``pi_(K+1) = 0``.
    """
    s = np.append(_sorted_desc(m.pvalues), 0.0)
    return float(np.sum((s[:-1] - s[1:]) * s[1:]))


def mmi_pi_integral(m: PlausibilityMeasure) -> float:
    """``int_0^1 sup_{y not in C_alpha} pi(y) d alpha`` by exact steps.

    The integrand only changes at the distinct p-values; on
    ``[b_i, b_{i+1})`` it equals its value at ``b_i``, where the excluded
    labels are read off the prediction set itself.
    """
    breaks = np.unique(np.concatenate([[0.0, 1.0], m.pvalues]))
    total = 0.0
    for lo, hi in zip(breaks[:-1], breaks[1:]):
        inside = prediction_set(m.profile, float(lo)).labels
        excluded = [y for y in range(m.K) if y not in inside]
        total += (hi - lo) * upper_prob(m, excluded)
    return float(total)


def mmi_regression(n_cal: int) -> float:
    """Instance-free regression MMI in the closed form
    ``1 + int_0^1 (1 - ceil((n+1)(1-alpha))) / (n+1) d alpha``.

    Integrated exactly: on ``alpha in ((j-1)/(n+1), j/(n+1)]`` the ceiling
    equals ``n + 2 - j``. Equal to ``(n+2) / (2(n+1))``.

    This counts calibration scores ``>= q_hat`` at the region boundary.
    The transducer itself only reaches the next lattice value below
    outside the region, so the profile-level integral is smaller by
    exactly ``1/(n+1)``; see :func:`mmi_regression_profile`.
    """
    if n_cal < 1:
        raise ValueError("n_cal must be >= 1")
    m = n_cal + 1
    integral = sum(Fraction(1 - (m + 1 - j), m) for j in range(1, m + 1)) / m
    return float(1 + integral)


def mmi_regression_profile(n_cal: int) -> float:
    """MMI-pi of a consonant regression transducer, from its p-value lattice.

    A continuous monotone score makes the transducer take every value
    ``j/(n+1)``, ``j = 1..n+1``; the closed form over those levels gives
    ``n / (2(n+1))``.
    """
    if n_cal < 1:
        raise ValueError("n_cal must be >= 1")
    m = n_cal + 1
    levels = np.arange(1, m + 1) / m
    return mmi_pi(PlausibilityMeasure(PValueProfile(levels[::-1], consonant=True, top_label=0)))


@dataclass(frozen=True)
class UncertaintyReport:
    mmi_tv: float
    mmi_pi: float
    set_sizes: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"mmi_tv": self.mmi_tv, "mmi_pi": self.mmi_pi, "set_sizes": {repr(a): s for a, s in self.set_sizes.items()}}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    def csv_row(self, instance_id) -> list:
        return [instance_id, repr(self.mmi_tv), repr(self.mmi_pi), *(str(s) for s in self.set_sizes.values())]


def csv_header(alphas) -> list[str]:
    return ["instance_id", "mmi_tv", "mmi_pi", *(f"size_at_{a!r}" for a in alphas)]


def report(m: PlausibilityMeasure, alphas=()) -> UncertaintyReport:
    sizes = {float(a): len(prediction_set(m.profile, float(a)).labels) for a in alphas}
    return UncertaintyReport(mmi_tv(m), mmi_pi(m), sizes)


# vectorised versions over rows of consonant p-value matrices ---------------------


def mmi_tv_rows(P) -> np.ndarray:
    S = -np.sort(-np.asarray(P, dtype=float), axis=1)
    return S[:, 1]


def mmi_pi_rows(P) -> np.ndarray:
    S = -np.sort(-np.asarray(P, dtype=float), axis=1)
    S = np.concatenate([S, np.zeros((S.shape[0], 1))], axis=1)
    return np.sum((S[:, :-1] - S[:, 1:]) * S[:, 1:], axis=1)

