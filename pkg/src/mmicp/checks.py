"""Closed forms versus subset-enumeration oracles, as runnable suites.

Each suite draws random consonant profiles on the p-value lattice
``{(1+j)/(1+n_cal)}`` and returns a :class:`CheckResult`; the first
offending profile is kept for the report. Used by ``mmicp oracle-check``
and by the test suite.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import oracle
from .imprecise import PlausibilityMeasure, ihdr, mmi_pi, mmi_pi_integral, mmi_tv
from .transducer import PValueProfile, consonant_rows, enforce_consonance, prediction_set

TOL = 1e-12


@dataclass
class CheckResult:
    name: str
    cases: int
    passed: bool
    worst: float = 0.0
    offending: tuple | None = None

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        out = f"{status}  {self.name:<28} cases={self.cases:<6} worst={self.worst:.3g}"
        if self.offending is not None:
            out += f"  profile={list(self.offending)}"
        return out


def lattice_profile(rng: np.random.Generator, K: int, n_cal: int) -> PValueProfile:
    """Consonant profile with raw values drawn from the conformal lattice."""
    raw = (1 + rng.integers(0, n_cal + 1, size=K)) / (n_cal + 1)
    return enforce_consonance(PValueProfile(raw))


def _bounds(n_cal) -> tuple[int, int]:
    """``n_cal`` is a fixed size or an inclusive ``(lo, hi)`` range."""
    return (n_cal, n_cal) if isinstance(n_cal, int) else tuple(n_cal)


def random_profiles(rng, count: int, k_min: int, k_max: int, n_cal):
    """``(profile, n)`` pairs with ``n`` drawn from ``n_cal``."""
    lo, hi = _bounds(n_cal)
    for _ in range(count):
        n = int(rng.integers(lo, hi + 1))
        yield lattice_profile(rng, int(rng.integers(k_min, k_max + 1)), n), n


class _Tracker:
    def __init__(self, name: str, tol: float = TOL):
        self.name, self.tol = name, tol
        self.cases, self.worst, self.offending = 0, 0.0, None

    def gap(self, err: float, pvalues) -> None:
        self.cases += 1
        if err > self.worst:
            self.worst = err
        if err > self.tol and self.offending is None:
            self.offending = tuple(float(v) for v in pvalues)

    def flag(self, ok: bool, pvalues) -> None:
        self.gap(0.0 if ok else math.inf, pvalues)

    def result(self) -> CheckResult:
        return CheckResult(self.name, self.cases, self.offending is None, self.worst, self.offending)


def check_mmi_tv(rng, count=1000, k_max=10, n_cal=20, fault=0.0) -> CheckResult:
    t = _Tracker("mmi_tv == brute force")
    for p, n in random_profiles(rng, count, 2, k_max, n_cal):
        m = PlausibilityMeasure(p)
        t.gap(abs(mmi_tv(m) + fault - oracle.mmi_bruteforce_tv(m)), p.pvalues)
    return t.result()


def check_mmi_pi(rng, count=1000, k_max=10, n_cal=20, fault=0.0) -> CheckResult:
    t = _Tracker("mmi_pi == integral == Choquet")
    for p, n in random_profiles(rng, count, 2, k_max, n_cal):
        m = PlausibilityMeasure(p)
        closed = mmi_pi(m) + fault
        err = max(abs(closed - mmi_pi_integral(m)), abs(closed - oracle.mmi_bruteforce_pi(m)))
        t.gap(err, p.pvalues)
    return t.result()


def lattice_alphas(n_cal: int) -> np.ndarray:
    """Every lattice level ``j/(n_cal+1)`` in ``[0, 1)``."""
    return np.arange(n_cal + 1) / (n_cal + 1)


def check_ihdr(rng, count=500, k_max=10, n_cal=20, fault=False) -> CheckResult:
    t = _Tracker("ihdr == CPR == brute force")
    for p, n in random_profiles(rng, count, 2, k_max, n_cal):
        m = PlausibilityMeasure(p)
        for a in lattice_alphas(n):
            greedy = ihdr(m, float(a))
            if fault and greedy:
                greedy = greedy - {min(greedy)}
            cpr = prediction_set(p, float(a)).labels
            brute = oracle.ihdr_bruteforce(m, float(a))
            t.flag(greedy == cpr and len(brute) == len(greedy) and brute == greedy, p.pvalues)
    return t.result()


def check_consonance(rng, count=500, k_max=10, n_cal=20) -> CheckResult:
    """Stretching changes the CPR only where the raw CPR is empty."""
    t = _Tracker("consonant CPR vs raw CPR")
    lo, hi = _bounds(n_cal)
    for _ in range(count):
        K = int(rng.integers(2, k_max + 1))
        n = int(rng.integers(lo, hi + 1))
        raw = (1 + rng.integers(0, n + 1, size=K)) / (n + 1)
        rp = PValueProfile(raw)
        cp = enforce_consonance(rp)
        for a in lattice_alphas(n):
            r, c = prediction_set(rp, float(a)).labels, prediction_set(cp, float(a)).labels
            t.flag(r == c or (not r and c == {cp.top_label}), raw)
    return t.result()


def check_mobius_chain(rng, count=200, k_max=10, n_cal=20) -> CheckResult:
    """Consonant masses sit on the nested level sets of pi and sum to 1."""
    t = _Tracker("Mobius mass on nested chain", tol=1e-9)
    for p, n in random_profiles(rng, count, 2, k_max, n_cal):
        lp = oracle.Capacity.plausibility(p.pvalues).conjugate()
        masses = oracle.mobius_inverse(lp)
        # focal sets are the upper level sets {pi >= v}, nested even with ties
        chain = {sum(1 << y for y in range(p.K) if p.pvalues[y] >= v) for v in p.pvalues}
        off = [abs(v) for A, v in enumerate(masses) if A not in chain]
        err = max(abs(masses.sum() - 1.0), *off)
        t.gap(err, p.pvalues)
    return t.result()


def check_hartley(k_max=10) -> CheckResult:
    t = _Tracker("GH vacuous / precise")
    for K in range(2, k_max + 1):
        gh = oracle.generalised_hartley(oracle.Capacity.vacuous_lower(K))
        t.flag(gh == math.log2(K), [K])
        dyadic = np.full(K, 1.0 / 2 ** math.ceil(math.log2(K)))
        dyadic[0] += 1.0 - dyadic.sum()
        t.flag(oracle.generalised_hartley(oracle.Capacity.additive(dyadic)) == 0.0, dyadic)
    return t.result()


def check_choquet_additive(rng, count=500, k_max=10) -> CheckResult:
    t = _Tracker("Choquet additive == E_p[f]")
    for _ in range(count):
        K = int(rng.integers(2, k_max + 1))
        probs = rng.dirichlet(np.ones(K))
        f = rng.normal(size=K)
        t.gap(abs(oracle.choquet_integral(oracle.Capacity.additive(probs), f) - float(probs @ f)), probs)
    return t.result()


def check_rows(rng, count=200, k_max=10, n_cal=20) -> CheckResult:
    """Batch row versions used by the harnesses against the scalar forms."""
    from .imprecise import mmi_pi_rows, mmi_tv_rows

    t = _Tracker("row-wise MMI == scalar MMI")
    for _ in range(count):
        K = int(rng.integers(2, k_max + 1))
        n = int(rng.integers(_bounds(n_cal)[0], _bounds(n_cal)[1] + 1))
        P = (1 + rng.integers(0, n + 1, size=(4, K))) / (n + 1)
        Pc = consonant_rows(P)
        tv, pi = mmi_tv_rows(Pc), mmi_pi_rows(Pc)
        for i in range(P.shape[0]):
            m = PlausibilityMeasure.from_pvalues(P[i])
            t.gap(max(abs(tv[i] - mmi_tv(m)), abs(pi[i] - mmi_pi(m))), P[i])
    return t.result()


def run_all(seed: int = 0, profiles: int = 200, k_max: int = 10, n_cal: int = 20, inject_fault: bool = False):
    if k_max > oracle.MAX_K:
        raise oracle.OracleSizeError(f"subset enumeration is capped at K={oracle.MAX_K}, got K={k_max}")
    fault = 1e-6 if inject_fault else 0.0
    rng = np.random.default_rng(seed)
    return [
        check_mmi_tv(rng, profiles, k_max, n_cal),
        check_mmi_pi(rng, profiles, k_max, n_cal, fault=fault),
        check_ihdr(rng, profiles, k_max, n_cal),
        check_consonance(rng, profiles, k_max, n_cal),
        check_mobius_chain(rng, profiles, k_max, n_cal),
        check_hartley(k_max),
        check_choquet_additive(rng, profiles, k_max),
        check_rows(rng, profiles, k_max, n_cal),
    ]
