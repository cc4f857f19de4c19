import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from onerange import fourier as F
from onerange.errors import DivergentIntegralError, DomainError, PoleError


def radial_ft(rf, p):
    """sqrt(2/pi)/p int r f(r) sin(p r) dr by QAWF; ``rf`` is r f(r)."""
    return F.SQRT_2_OVER_PI / p * integrate.quad(rf, 0, np.inf, weight="sin", wvar=p)[0]


def test_yukawa_and_coulomb_transforms():
    assert F.yukawa_ft(0.0, 2.0) == pytest.approx(F.SQRT_2_OVER_PI / 4)
    with pytest.raises(DomainError):
        F.yukawa_ft(1.0, 0.0)
    with pytest.raises(PoleError):
        F.coulomb_ft([0.0, 1.0])
    p = np.array([0.3, 1.0, 7.0])
    assert np.allclose(F.yukawa_ft(p, 1e-8), F.coulomb_ft(p), rtol=1e-12)


@pytest.mark.parametrize("p", [0.5, 2.0])
def test_transforms_against_sine_quadrature(p):
    assert F.yukawa_ft(p, 1.3) == pytest.approx(radial_ft(lambda r: math.exp(-1.3 * r), p), rel=1e-9)
    for d in (F.pure_exponential(1.5), F.exp_times_r(0.8)):
        assert F.density_ft(d, p) == pytest.approx(radial_ft(lambda r: r * float(d.coordinate(r)), p), rel=1e-9)


@given(st.floats(0.2, 5.0), st.floats(0.0, 20.0), st.floats(0.2, 5.0))
def test_density_scaling(a, p, lam):
    # e^{-lam a r} has transform lam^{-3} F(p / lam)
    d1, d2 = F.pure_exponential(a), F.pure_exponential(lam * a)
    assert F.density_ft(d2, p) == pytest.approx(lam ** -3 * F.density_ft(d1, p / lam), rel=1e-12)


def test_density_validation():
    with pytest.raises(DomainError):
        F.InteractionDensity("gaussian")
    with pytest.raises(DomainError):
        F.pure_exponential(0.0)
    with pytest.raises(DomainError):
        F.InteractionDensity("custom")
    with pytest.raises(DomainError):
        F.slow_decay_witness().coordinate(1.0)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0])
def test_coulomb_closed_form(a):
    f = F.pure_exponential(a)
    val, err = F.interaction_integral(f, f, 0.0, with_error=True)
    assert val == pytest.approx(20 * math.pi ** 2 / a ** 5, rel=1e-12)
    assert err < 1e-10 * val


def test_yukawa_interaction_closed_form():
    # e^{-r} with itself under e^{-beta r}/r, by partial fractions in p
    f = F.pure_exponential(1.0)
    beta = 0.7
    ref = 16 * math.pi ** 2 * (2 / math.pi) * 4 * integrate.quad(
        lambda p: p * p / ((1 + p * p) ** 4 * (beta * beta + p * p)), 0, np.inf, epsabs=1e-15, epsrel=1e-13)[0]
    assert F.interaction_integral(f, f, beta) == pytest.approx(ref, rel=1e-10)


def test_monotone_in_beta_and_bounded():
    f, g = F.pure_exponential(1.0), F.exp_times_r(1.3)
    betas = [2.0, 1.0, 0.5, 0.1, 0.01]
    vals = [F.interaction_integral(f, f, b) for b in betas]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    nf, ng = F.momentum_norm_sq(f), F.momentum_norm_sq(g)
    for b in betas:
        # kernel p^2/(beta^2+p^2) <= p^2/beta^2 gives |Y| <= (4 pi/beta^2) ||f|| ||g||
        assert abs(F.interaction_integral(f, g, b)) <= 4 * math.pi / b ** 2 * math.sqrt(nf * ng)


def test_symmetry():
    f, g = F.pure_exponential(0.9), F.exp_times_r(1.4)
    assert F.interaction_integral(f, g, 0.3) == pytest.approx(F.interaction_integral(g, f, 0.3), rel=1e-14)


@pytest.mark.parametrize("pair", [(1.0, 1.0), (0.5, 2.0)])
def test_plancherel(pair):
    for f in (F.pure_exponential(pair[0]), F.exp_times_r(pair[0])):
        for g in (F.pure_exponential(pair[1]), F.exp_times_r(pair[1])):
            rep = F.plancherel_check(f, g)
            assert rep["relative_difference"] < 1e-8


def test_momentum_norm():
    f = F.pure_exponential(1.0)
    assert F.momentum_norm_sq(f) == pytest.approx(math.pi, rel=1e-12)


def test_beta_limit_continuous():
    f = F.pure_exponential(1.0)
    study = F.beta_limit_study(f, f, [0.1, 0.01, 0.001, 1e-4])
    assert study.verdict == "continuous"
    assert study.coulomb == pytest.approx(20 * math.pi ** 2, rel=1e-12)
    # C - Y(beta) ~ 64 pi^2 beta for this pair
    gaps = [study.coulomb - v for _, v, _ in study.rows]
    assert gaps[-1] == pytest.approx(64 * math.pi ** 2 * 1e-4, rel=1e-3)
    lines = study.to_csv().splitlines()
    assert lines[0] == "beta,value,error_estimate" and lines[-1].startswith("0.0,")


def test_beta_limit_divergent_witness():
    w = F.slow_decay_witness()
    with pytest.raises(DivergentIntegralError):
        F.interaction_integral(w, w, 0.0)
    study = F.beta_limit_study(w, w, [0.1, 0.01, 0.001])
    assert study.verdict == "divergent" and study.coulomb is None
    assert study.details["increasing"]
    vals = [v for _, v, _ in study.rows]
    assert vals[-1] > vals[0] + 1.0


def test_beta_sequence_validation():
    f = F.pure_exponential(1.0)
    with pytest.raises(DomainError):
        F.beta_limit_study(f, f, [0.01, 0.1])
    with pytest.raises(DomainError):
        F.interaction_integral(f, f, -1.0)


@settings(max_examples=15)
@given(st.floats(0.3, 3.0), st.floats(0.3, 3.0))
def test_coulomb_mixed_closed_form(a, b):
    # e^{-a r} with e^{-b r}: pure exponentials only, checked against coordinate-space potential
    f, g = F.pure_exponential(a), F.pure_exponential(b)
    # potential of e^{-b r}: 4 pi [2/(b^3 r) - e^{-b r}(2/(b^3 r) + 1/b^2)]
    def integrand(r):
        pot = 4 * math.pi * (2 / (b ** 3 * r) * (1 - math.exp(-b * r)) - math.exp(-b * r) / b ** 2) if r > 0 else 4 * math.pi / b ** 2
        return 4 * math.pi * r * r * math.exp(-a * r) * pot
    ref = integrate.quad(integrand, 0, np.inf, epsabs=1e-13, epsrel=1e-12)[0]
    assert F.interaction_integral(f, g, 0.0) == pytest.approx(ref, rel=1e-8)
