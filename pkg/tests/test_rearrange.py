import json
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from onerange import expansions as E, rearrange as R
from onerange.errors import DomainError
from onerange.specfun import laguerre_eval_exact


def test_two_term_example():
    # L_0 + L_1 = 1 + (1 - x) = 2 - x
    res = R.rearrange_finite([1, 1], 0)
    assert res.coeffs == [2, -1]
    assert all(isinstance(s, R.Finite) for s in res.statuses)


def test_coefficient_count_checked():
    with pytest.raises(DomainError):
        R.rearrange_finite([1, 2, 3], 0, N=1)


fractions = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@given(st.lists(fractions, min_size=1, max_size=8), st.sampled_from([0, Fraction(1, 2), 2, Fraction(-1, 3)]),
       st.fractions(min_value=0, max_value=6, max_denominator=5))
def test_finite_roundtrip_exact(lam, alpha, x):
    res = R.rearrange_finite(lam, alpha)
    direct = sum(c * laguerre_eval_exact(n, alpha, x) for n, c in enumerate(lam))
    assert R.polynomial_value(res.coeffs, x) == direct


def test_precheck():
    assert R.analyticity_precheck(2) == R.ANALYTIC
    assert R.analyticity_precheck(0) == R.ANALYTIC
    assert R.analyticity_precheck(2.5) == R.NOT_ANALYTIC
    assert R.analyticity_precheck(Fraction(1, 2), 0.3) == R.NOT_ANALYTIC


@pytest.mark.parametrize("mu", [0.5, 1.5, 2.5])
def test_fractional_power_diverges_from_ceil_mu(mu):
    s = E.power_in_laguerre(mu, 0)
    first = math.ceil(mu)
    for nu in range(first + 2):
        rep = R.rearrange_infinite_probe(s, nu)
        if nu < first:
            # derivatives of x^mu below order mu vanish at the origin
            assert isinstance(rep.status, R.Finite)
            assert abs(rep.status.value) < 1e-4
        else:
            assert isinstance(rep.status, R.DivergentInnerSeries)
            assert rep.status.evidence["min_ratio_excess"] >= 0


def test_divergent_terms_do_not_vanish():
    rep = R.rearrange_infinite_probe(E.power_in_laguerre(0.5, 0), 1)
    ev = rep.status.evidence
    # terms decay slower than 1/m: the last one is still a sizeable fraction of the first
    assert ev["abs_term_last"] > 0.5 * ev["abs_term_first"]
    doc = json.loads(rep.to_json())
    assert doc["status"] == "DivergentInnerSeries" and len(doc["ratio_trace"]) == 16


def test_integer_power_recovers_taylor():
    u = 0.3
    res = R.power_series_from_stream(E.exppower_in_laguerre(2, 0, u), 5)
    expected = [0, 0, 1, u, u * u / 2, u ** 3 / 6]
    assert all(isinstance(s, R.Finite) for s in res.statuses)
    assert np.allclose(res.coeffs, expected, atol=1e-10)


def test_terminating_stream_uses_exact_path():
    s = E.power_in_laguerre(3, Fraction(1, 2))
    res = R.power_series_from_stream(s, 4)
    assert res.coeffs == pytest.approx([0, 0, 0, 1, 0], abs=1e-12)


def test_fractional_exppower_marks_nonanalytic():
    res = R.power_series_from_stream(E.exppower_in_laguerre(0.5, 0, 0.3), 3)
    names = [s.name for s in res.statuses]
    assert names == ["Finite", "DivergentInnerSeries", "DivergentInnerSeries", "DivergentInnerSeries"]
    assert math.isnan(res.coeffs[1]) and math.isinf(res.inner[1])


def test_probe_needs_laguerre_basis():
    with pytest.raises(DomainError):
        R.rearrange_infinite_probe(E.yukawa_in_guseinov(0, 1.0), 0)
    with pytest.raises(DomainError):
        R.rearrange_infinite_probe(E.power_in_laguerre(0.5, 0), 0, m_max=8)
