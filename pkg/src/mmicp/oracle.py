"""Exponential-time reference computations over all subsets of a small label space.

Subsets are encoded as bitmasks: bit ``y`` set means label ``y`` is in the
subset, so a capacity on ``K`` labels is an array of ``2**K`` values.
These routines are deliberately naive and share no code with the closed
forms in :mod:`mmicp.imprecise`, which they are used to check.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

from .imprecise import PlausibilityMeasure

MAX_K = 12


class OracleSizeError(ValueError):
    """Raised when a label space is too large for subset enumeration."""


def _check_k(K: int) -> None:
    if K > MAX_K:
        raise OracleSizeError(f"subset enumeration is capped at K={MAX_K}, got K={K}")
    if K < 1:
        raise OracleSizeError("need at least one label")


def members(mask: int, K: int) -> list[int]:
    return [y for y in range(K) if mask >> y & 1]


@functools.lru_cache(maxsize=None)
def popcounts(K: int) -> np.ndarray:
    counts = np.zeros(1 << K, dtype=np.int64)
    for y in range(K):
        counts[1 << y : 1 << (y + 1)] = counts[: 1 << y] + 1
    counts.setflags(write=False)
    return counts


@dataclass(frozen=True)
class Capacity:
    K: int
    values: np.ndarray

    def __post_init__(self):
        _check_k(self.K)
        v = np.array(self.values, dtype=float)
        if v.shape != (1 << self.K,):
            raise ValueError(f"expected {1 << self.K} subset values, got {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __call__(self, A) -> float:
        mask = 0
        for y in A:
            mask |= 1 << int(y)
        return float(self.values[mask])

    @property
    def full(self) -> int:
        return (1 << self.K) - 1

    def is_capacity(self, tol: float = 0.0) -> bool:
        v = self.values
        if abs(v[0]) > tol or abs(v[self.full] - 1.0) > tol:
            return False
        for y in range(self.K):
            bit = 1 << y
            without = np.array([m for m in range(1 << self.K) if not m & bit])
            if np.any(v[without | bit] < v[without] - tol):
                return False
        return True

    def conjugate(self) -> "Capacity":
        """``A -> 1 - nu(A^c)``."""
        masks = np.arange(1 << self.K)
        return Capacity(self.K, 1.0 - self.values[self.full ^ masks])

    @classmethod
    def plausibility(cls, pvalues) -> "Capacity":
        """``A -> max_{y in A} pi(y)``, 0 on the empty set."""
        pi = np.asarray(pvalues, dtype=float)
        K = pi.size
        _check_k(K)
        vals = np.zeros(1 << K)
        # masks in [2^y, 2^(y+1)) are the masks below 2^y with label y added
        for y in range(K):
            vals[1 << y : 1 << (y + 1)] = np.maximum(vals[: 1 << y], pi[y])
        return cls(K, vals)

    @classmethod
    def additive(cls, probs) -> "Capacity":
        p = np.asarray(probs, dtype=float)
        K = p.size
        _check_k(K)
        vals = np.zeros(1 << K)
        for mask in range(1, 1 << K):
            low = mask & -mask
            vals[mask] = vals[mask ^ low] + p[low.bit_length() - 1]
        return cls(K, vals)

    @classmethod
    def vacuous_lower(cls, K: int) -> "Capacity":
        _check_k(K)
        vals = np.zeros(1 << K)
        vals[-1] = 1.0
        return cls(K, vals)


def choquet_integral(nu: Capacity, f) -> float:
    """``inf f + int_{inf f}^{sup f} nu({f >= t}) dt``.

    The level set ``{f >= t}`` is constant between consecutive distinct
    values of ``f``, so the integral is a finite sum.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (nu.K,):
        raise ValueError("f needs one value per label")
    levels = np.unique(f)
    total = float(levels[0])
    for lo, hi in zip(levels[:-1], levels[1:]):
        # for t in (lo, hi]: {f >= t} = {f >= hi}
        upper_set = [y for y in range(nu.K) if f[y] >= hi]
        total += (hi - lo) * nu(upper_set)
    return total


def _plausibility_pair(m: PlausibilityMeasure) -> tuple[Capacity, Capacity]:
    _check_k(m.K)
    up = Capacity.plausibility(m.pvalues)
    return up, up.conjugate()


def mmi_bruteforce_tv(m: PlausibilityMeasure) -> float:
    """``max_A |upper(A) - lower(A)|`` over all ``2**K`` subsets."""
    up, low = _plausibility_pair(m)
    return float(np.max(np.abs(up.values - low.values)))


def mmi_bruteforce_pi(m: PlausibilityMeasure) -> float:
    """Choquet(upper, pi) - Choquet(lower, pi)."""
    up, low = _plausibility_pair(m)
    return choquet_integral(up, m.pvalues) - choquet_integral(low, m.pvalues)


def mobius_inverse(lp: Capacity) -> np.ndarray:
    """``m(A) = sum_{B subset A} (-1)^{|A|-|B|} lp(B)``, indexed by bitmask.

    Computed as ``K`` successive one-coordinate differences, which expands
    to exactly the alternating sum above.
    """
    m = lp.values.copy()
    masks = np.arange(1 << lp.K)
    for y in range(lp.K):
        bit = 1 << y
        with_bit = masks[(masks & bit) != 0]
        m[with_bit] = m[with_bit] - m[with_bit ^ bit]
    return m


def mobius_inverse_naive(lp: Capacity) -> np.ndarray:
    """Direct subset-sum form; ``3**K`` work, for cross-checking."""
    K = lp.K
    out = np.zeros(1 << K)
    for A in range(1 << K):
        size_a = bin(A).count("1")
        B = A
        total = 0.0
        while True:
            total += (-1) ** (size_a - bin(B).count("1")) * lp.values[B]
            if B == 0:
                break
            B = (B - 1) & A
        out[A] = total
    return out


def zeta(masses: np.ndarray, K: int) -> np.ndarray:
    """Inverse of :func:`mobius_inverse`: ``lp(A) = sum_{B subset A} m(B)``."""
    v = np.array(masses, dtype=float, copy=True)
    masks = np.arange(1 << K)
    for y in range(K):
        bit = 1 << y
        with_bit = masks[(masks & bit) != 0]
        v[with_bit] = v[with_bit] + v[with_bit ^ bit]
    return v


def generalised_hartley(lp: Capacity) -> float:
    """``sum_A m(A) log2 |A|`` with ``m`` the Mobius inverse of ``lp``."""
    m = mobius_inverse(lp)
    sizes = popcounts(lp.K)
    nz = sizes > 1
    return float(np.sum(m[nz] * np.log2(sizes[nz])))


def ihdr_bruteforce(m: PlausibilityMeasure, alpha: float) -> frozenset:
    """Scan all subsets for the smallest one with ``lower >= 1 - alpha``.

    Among equal-size candidates prefer higher p-values, then lower labels.
    """
    _check_k(m.K)
    _, low = _plausibility_pair(m)
    feasible = np.flatnonzero(low.values >= 1.0 - alpha)
    sizes = popcounts(m.K)[feasible]
    best = None
    best_key = None
    for mask in feasible[sizes == sizes.min()]:
        A = members(int(mask), m.K)
        key = sorted((-m.pvalues[y], y) for y in A)
        if best_key is None or key < best_key:
            best, best_key = A, key
    return frozenset(best)
