"""One-sided Wilcoxon signed-rank test for paired samples."""

from __future__ import annotations

import math

import numpy as np
from scipy.stats import norm, rankdata

EXACT_MAX_N = 20
MIN_NONZERO = 5


class DegenerateTestError(ValueError):
    """Too few non-zero paired differences to run the test."""


def signed_rank_statistic(d) -> tuple[float, np.ndarray]:
    """``W+`` (sum of ranks of positive differences) and the rank vector.

    Zero differences must already be removed; tied ``|d|`` get mid-ranks.
    """
    d = np.asarray(d, dtype=float)
    ranks = rankdata(np.abs(d), method="average")
    return float(ranks[d > 0].sum()), ranks


def exact_upper_tail(ranks, w_plus: float) -> float:
    """``P(W+ >= w_plus)`` under random signs, by convolving doubled ranks.

    Mid-ranks are multiples of 1/2, so doubled ranks are integers and the
    null distribution is an exact integer-support polynomial product.
    """
    r2 = np.rint(2 * np.asarray(ranks, dtype=float)).astype(np.int64)
    total = int(r2.sum())
    counts = np.zeros(total + 1, dtype=np.float64)
    counts[0] = 1.0
    for r in r2:
        shifted = np.zeros_like(counts)
        shifted[r:] = counts[: total + 1 - r]
        counts = counts + shifted
    target = int(math.ceil(2 * w_plus - 1e-9))
    return float(counts[target:].sum() / 2.0 ** len(r2))


def normal_upper_tail(ranks, w_plus: float) -> float:
    """Normal approximation with tie and continuity corrections."""
    n = len(ranks)
    mean = n * (n + 1) / 4.0
    _, tie_counts = np.unique(ranks, return_counts=True)
    var = n * (n + 1) * (2 * n + 1) / 24.0 - np.sum(tie_counts**3 - tie_counts) / 48.0
    z = (w_plus - mean - 0.5) / math.sqrt(var)
    return float(norm.sf(z))


def wilcoxon_signed_rank(a, b, method: str = "auto") -> tuple[float, float]:
    """Test ``H1: a > b`` on paired samples.

    Returns ``(W+, p)``. Zero differences are dropped; with fewer than five
    left a :class:`DegenerateTestError` is raised. ``method`` is
    ``"exact"``, ``"normal"`` or ``"auto"`` (exact up to n=20).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("paired samples must be 1-d and of equal length")
    # rounding keeps ties like 0.554 - 0.56 vs 0.521 - 0.527 from splitting on float noise
    d = np.round(a - b, 12)
    d = d[d != 0]
    if d.size < MIN_NONZERO:
        raise DegenerateTestError(f"only {d.size} non-zero differences (need {MIN_NONZERO})")
    w, ranks = signed_rank_statistic(d)
    if method == "auto":
        method = "exact" if d.size <= EXACT_MAX_N else "normal"
    if method == "exact":
        return w, exact_upper_tail(ranks, w)
    if method == "normal":
        return w, normal_upper_tail(ranks, w)
    raise ValueError(f"unknown method {method!r}")


def pvalue_matrix(results: dict) -> tuple[list[str], list[list[float | None]]]:
    """Pairwise one-sided p-values; cell ``(i, j)`` tests "i better than j".

    ``results`` maps a strategy name to its per-seed metric list. Diagonal
    and degenerate pairs are ``None``.
    """
    names = list(results)
    M: list[list[float | None]] = []
    for i in names:
        row = []
        for j in names:
            if i == j:
                row.append(None)
                continue
            try:
                row.append(wilcoxon_signed_rank(results[i], results[j])[1])
            except DegenerateTestError:
                row.append(None)
        M.append(row)
    return names, M
