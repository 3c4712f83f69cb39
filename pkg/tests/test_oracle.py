import math

import numpy as np
import pytest
from hypothesis import given, settings

from conftest import lattice_pvalues
from mmicp import checks, oracle
from mmicp.imprecise import PlausibilityMeasure, ihdr, mmi_pi, mmi_tv


def pm(p):
    return PlausibilityMeasure.from_pvalues(p)


def test_choquet_indicator_and_constant():
    nu = oracle.Capacity.plausibility([1.0, 0.5, 0.25])
    assert oracle.choquet_integral(nu, [0, 1, 1]) == nu([1, 2]) == 0.5
    assert oracle.choquet_integral(nu, [0.7, 0.7, 0.7]) == 0.7


def test_choquet_upper_lower_hand_values():
    up = oracle.Capacity.plausibility([1.0, 0.5, 0.25])
    f = [1.0, 0.5, 0.25]
    assert oracle.choquet_integral(up, f) == 1.0
    assert oracle.choquet_integral(up.conjugate(), f) == 1 - 0.3125


def test_bruteforce_examples():
    assert oracle.mmi_bruteforce_tv(pm([1.0, 0.4, 0.1])) == pytest.approx(0.4, abs=1e-15)
    assert oracle.mmi_bruteforce_tv(pm([1.0, 0.0])) == 0.0
    assert oracle.mmi_bruteforce_pi(pm([1.0, 0.5, 0.25])) == pytest.approx(0.3125, abs=1e-15)
    assert oracle.mmi_bruteforce_pi(pm([1.0, 0.0, 0.0])) == 0.0


def test_capacity_axioms():
    up = oracle.Capacity.plausibility([1.0, 0.3, 0.6, 0.1])
    assert up.is_capacity() and up.conjugate().is_capacity()
    with pytest.raises(ValueError):
        oracle.Capacity(2, [0.0, 0.5])


def test_mobius_examples():
    m = oracle.mobius_inverse(oracle.Capacity.vacuous_lower(3))
    assert m[0b111] == 1.0 and np.count_nonzero(m) == 1
    precise = oracle.Capacity.additive([0.5, 0.25, 0.25])
    np.testing.assert_allclose(oracle.mobius_inverse(precise)[[1, 2, 4]], [0.5, 0.25, 0.25], atol=1e-15)
    cons = oracle.mobius_inverse(oracle.Capacity.plausibility([1.0, 0.5, 0.1]).conjugate())
    np.testing.assert_allclose(cons[[0b001, 0b011, 0b111]], [0.5, 0.4, 0.1], atol=1e-12)
    assert np.sum(np.abs(np.delete(cons, [0b001, 0b011, 0b111]))) <= 1e-12


def test_mobius_fast_matches_naive_and_roundtrips():
    rng = np.random.default_rng(0)
    for K in (1, 3, 6):
        lp = oracle.Capacity.plausibility(rng.random(K)).conjugate()
        fast, naive = oracle.mobius_inverse(lp), oracle.mobius_inverse_naive(lp)
        np.testing.assert_allclose(fast, naive, atol=1e-12)
        np.testing.assert_allclose(oracle.zeta(fast, K), lp.values, atol=1e-12)
        assert fast.sum() == pytest.approx(1.0, abs=1e-12)


def test_hartley():
    assert oracle.generalised_hartley(oracle.Capacity.plausibility([1.0, 0.5, 0.1]).conjugate()) == pytest.approx(
        0.4 + 0.1 * math.log2(3), abs=1e-12
    )
    assert oracle.generalised_hartley(oracle.Capacity.vacuous_lower(8)) == 3.0
    assert oracle.generalised_hartley(oracle.Capacity.additive([0.5, 0.25, 0.125, 0.125])) == 0.0


@given(lattice_pvalues(min_k=3, max_k=7))
def test_hartley_monotone_in_non_top(p):
    m = pm(p)
    q = m.pvalues.copy()
    i = int(np.argsort(-q, kind="stable")[-1])
    q[i] = min(1.0, q[i] + 0.05)
    gh = lambda v: oracle.generalised_hartley(oracle.Capacity.plausibility(v).conjugate())
    assert gh(q) >= gh(m.pvalues) - 1e-12


def test_ihdr_bruteforce_examples():
    m = pm([1.0, 0.5, 0.25])
    assert oracle.ihdr_bruteforce(m, 0.0) == {0, 1, 2}
    assert oracle.ihdr_bruteforce(m, 0.95) == {0}


@settings(max_examples=60)
@given(lattice_pvalues(max_k=8, max_n=12))
def test_closed_forms_against_enumeration(p):
    m = pm(p)
    assert abs(mmi_tv(m) - oracle.mmi_bruteforce_tv(m)) <= 1e-12
    assert abs(mmi_pi(m) - oracle.mmi_bruteforce_pi(m)) <= 1e-12
    n = round(1 / min(p)) if min(p) > 0 else 12
    for a in np.arange(n) / n:
        assert ihdr(m, float(a)) == oracle.ihdr_bruteforce(m, float(a))


def test_choquet_comonotonic_additivity():
    rng = np.random.default_rng(3)
    nu = oracle.Capacity.plausibility([1.0, 0.2, 0.7, 0.4, 0.9])
    for _ in range(50):
        f = np.sort(rng.random(5))
        g = np.sort(rng.random(5))
        perm = rng.permutation(5)
        f, g = f[perm], g[perm]
        lhs = oracle.choquet_integral(nu, f + g)
        assert lhs == pytest.approx(oracle.choquet_integral(nu, f) + oracle.choquet_integral(nu, g), abs=1e-12)


def test_size_cap():
    with pytest.raises(oracle.OracleSizeError):
        oracle.Capacity.vacuous_lower(13)
    with pytest.raises(oracle.OracleSizeError):
        oracle.mmi_bruteforce_tv(pm(np.linspace(1, 0.1, 13)))


def test_check_suites_pass_and_fault_is_caught():
    results = checks.run_all(seed=1, profiles=40, k_max=8)
    assert all(r.passed for r in results), [r.line() for r in results]
    faulty = checks.run_all(seed=1, profiles=40, k_max=8, inject_fault=True)
    bad = [r for r in faulty if not r.passed]
    assert bad and bad[0].offending is not None
