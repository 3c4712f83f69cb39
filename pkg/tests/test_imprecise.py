import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import lattice_pvalues
from mmicp.imprecise import (
    PlausibilityMeasure,
    csv_header,
    ihdr,
    lower_prob,
    mmi_pi,
    mmi_pi_integral,
    mmi_pi_rows,
    mmi_regression,
    mmi_regression_profile,
    mmi_tv,
    mmi_tv_rows,
    report,
    upper_prob,
)
from mmicp.transducer import PValueProfile, consonant_rows, prediction_set


def pm(p):
    return PlausibilityMeasure.from_pvalues(p)


def test_requires_consonance():
    with pytest.raises(ValueError):
        PlausibilityMeasure(PValueProfile([0.5, 0.2]))


def test_upper_lower():
    m = pm([1.0, 0.5, 0.25])
    assert upper_prob(m, []) == 0.0
    assert upper_prob(m, [1, 2]) == 0.5
    assert lower_prob(m, [0]) == 0.5
    assert lower_prob(m, [0, 1, 2]) == 1.0
    with pytest.raises(IndexError):
        upper_prob(m, [3])


def test_mmi_tv_examples():
    assert mmi_tv(pm([1.0, 0.4, 0.1])) == 0.4
    assert mmi_tv(pm([1.0, 1.0, 1.0])) == 1.0
    with pytest.raises(ValueError):
        mmi_tv(pm([1.0]))


def test_mmi_pi_examples():
    # hand-derived: (1 - .5)(.5) + (.5 - .25)(.25) + (.25 - 0)(0)
    assert mmi_pi(pm([1.0, 0.5, 0.25])) == 0.3125
    assert mmi_pi(pm([1.0, 0.0, 0.0])) == 0.0
    assert mmi_pi(pm([1.0, 0.6, 0.6, 0.2])) == pytest.approx(0.32)
    # empty-sup convention: all labels fully plausible gives 0, unlike TV
    assert mmi_pi(pm([1.0, 1.0, 1.0])) == 0.0


def test_ihdr_examples():
    m = pm([1.0, 0.5, 0.25])
    assert ihdr(m, 0.0) == {0, 1, 2}
    assert ihdr(m, 0.3) == {0, 1}
    assert ihdr(m, 0.9) == {0}


@given(lattice_pvalues())
def test_mmi_pi_integral_matches_closed_form(p):
    m = pm(p)
    assert abs(mmi_pi_integral(m) - mmi_pi(m)) <= 1e-12


@given(lattice_pvalues(), st.floats(0, 0.999))
def test_ihdr_is_cpr(p, a):
    m = pm(p)
    assert ihdr(m, a) == prediction_set(m.profile, a).labels


@given(lattice_pvalues())
def test_measures_bounded(p):
    m = pm(p)
    assert 0.0 <= mmi_pi(m) <= 0.5  # integrand sup_{pi <= alpha} pi is at most alpha
    assert 0.0 <= mmi_pi(m) <= mmi_tv(m) <= 1.0


@given(lattice_pvalues(min_k=3))
def test_mmi_monotone_in_non_top(p):
    m = pm(p)
    q = m.pvalues.copy()
    i = int(np.argsort(-q, kind="stable")[-1])
    q[i] = min(1.0, q[i] + 0.1)
    assert mmi_tv(pm(q)) >= mmi_tv(m)


def test_rows_match_scalars():
    P = consonant_rows(np.random.default_rng(0).integers(1, 11, size=(30, 6)) / 11)
    tv, pi = mmi_tv_rows(P), mmi_pi_rows(P)
    for i in range(30):
        assert tv[i] == mmi_tv(pm(P[i]))
        assert pi[i] == pytest.approx(mmi_pi(pm(P[i])), abs=1e-15)


def test_mmi_regression_closed_form():
    assert mmi_regression(1) == 0.75
    assert mmi_regression(3) == 0.625
    for n in (1, 5, 20, 999):
        assert mmi_regression(n) == pytest.approx((n + 2) / (2 * (n + 1)), abs=1e-12)
        assert mmi_regression_profile(n) == pytest.approx(n / (2 * (n + 1)), abs=1e-12)
        assert mmi_regression(n) - mmi_regression_profile(n) == pytest.approx(1 / (n + 1), abs=1e-12)


def test_report_serialisation():
    r = report(pm([1.0, 0.5, 0.25]), [0.1, 0.3])
    assert r.set_sizes == {0.1: 3, 0.3: 2}
    assert json.loads(r.to_json())["mmi_pi"] == 0.3125
    assert csv_header([0.1, 0.3]) == ["instance_id", "mmi_tv", "mmi_pi", "size_at_0.1", "size_at_0.3"]
    assert r.csv_row(7) == [7, "0.5", "0.3125", "3", "2"]
