import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st
from numpy.polynomial.legendre import leggauss
from scipy.integrate import quad

from onerange import radial
from onerange.errors import DivergentIntegralError, DomainError
from onerange.radial import ExpPolyRadial, SphericalFunction


def test_radial_moment_exact_and_float():
    assert radial.radial_moment(3, Fraction(1, 2)) == Fraction(6) * 16
    assert radial.radial_moment(0.5, 2.0) == pytest.approx(math.gamma(1.5) / 2 ** 1.5)
    with pytest.raises(DivergentIntegralError):
        radial.radial_moment(-1, 1.0)
    with pytest.raises(DivergentIntegralError):
        radial.radial_moment(2, 0)


def test_yukawa_norm_is_two_pi_over_beta():
    # ||e^{-br}/r||^2 = 4 pi int e^{-2br} dr = 2 pi / b
    for beta in (0.5, 1.0, 3.0):
        norm, member, _ = radial.norm_and_membership(radial.yukawa(beta), 0)
        assert member
        assert norm == pytest.approx(2 * math.pi / beta, rel=1e-14)


def test_membership_table():
    assert not radial.membership(radial.yukawa(1.0), -1)[0]
    assert radial.membership(radial.yukawa(1.0), 0)[0]
    for k in (-1, 0, 1, 2):
        ok, reason = radial.membership(radial.coulomb(), k)
        assert not ok and reason


def test_weighted_space_domain():
    with pytest.raises(DomainError):
        radial.WeightedSpace(-2)
    with pytest.raises(DomainError):
        ExpPolyRadial.single(1.0, 1, -0.5)
    with pytest.raises(DomainError):
        SphericalFunction(ExpPolyRadial.single(1.0, 0, 1.0), 1, 2)


def test_inner_product_closed_form_vs_scipy():
    f = radial.s_function(1.0, 1, 0.7)
    g = radial.s_function(2.0, 0.5, 1.3)
    for k in (-1, 0, 2):
        ref = 4 * math.pi * quad(lambda r: 2 * r * r ** 0.5 * math.exp(-2 * r) * r ** (k + 2), 0, np.inf)[0]
        assert radial.inner_product(f, g, k) == pytest.approx(ref, rel=1e-10)


def test_inner_product_across_channels_vanishes():
    f = SphericalFunction(ExpPolyRadial.single(1.0, 1, 1.0), 1, 0)
    g = SphericalFunction(ExpPolyRadial.single(1.0, 1, 1.0), 1, 1)
    assert radial.inner_product(f, g) == 0.0


@pytest.mark.parametrize("n", [10, 100, 400, 1000])
def test_gauss_laguerre_log_rule_moments(n):
    for alpha in (-0.5, 0.0, 2.5):
        x, logw = radial.genlaguerre_log_rule(n, alpha)
        w = np.exp(logw)
        for p in (0, 1, 3):
            ref = math.gamma(alpha + p + 1)
            assert np.dot(w, x ** p) == pytest.approx(ref, rel=1e-11)
        assert np.all(np.diff(x) > 0)


def test_quadrature_inner_product_matches_closed_form():
    f = radial.s_function(1.0, 2, 0.5)
    g = radial.s_function(1.0, -0.5, 1.5)
    for k in (-1, 0, 1):
        assert radial.quadrature_inner_product(f, g, k) == pytest.approx(radial.inner_product(f, g, k), rel=1e-12)


def test_quadrature_rejects_divergent():
    with pytest.raises(DivergentIntegralError):
        radial.quadrature_inner_product(radial.coulomb(), radial.coulomb(), 0)


@pytest.mark.parametrize("ell", range(5))
def test_real_harmonics_orthonormal(ell):
    u, wu = leggauss(32)
    phi = np.linspace(0, 2 * np.pi, 64, endpoint=False)
    wphi = 2 * np.pi / 64
    U, P = np.meshgrid(u, phi, indexing="ij")
    W = wu[:, None] * wphi
    for m1 in range(-ell, ell + 1):
        y1 = radial.real_harmonic(ell, m1, U, P)
        for ell2 in range(ell + 1):
            for m2 in range(-ell2, ell2 + 1):
                y2 = radial.real_harmonic(ell2, m2, U, P)
                expected = 1.0 if (ell, m1) == (ell2, m2) else 0.0
                assert np.sum(W * y1 * y2) == pytest.approx(expected, abs=1e-12)


@given(st.floats(0.1, 5), st.floats(0.1, 5), st.integers(0, 4), st.integers(0, 4), st.integers(-1, 2))
def test_inner_product_symmetric_and_positive(a, b, p, q, k):
    f = radial.s_function(1.0, p, a)
    g = radial.s_function(1.0, q, b)
    assert radial.inner_product(f, g, k) == pytest.approx(radial.inner_product(g, f, k), rel=1e-14)
    assert radial.inner_product(f, f, k) > 0


@given(st.floats(0.2, 4), st.integers(-1, 3))
def test_cauchy_schwarz(a, k):
    f = radial.s_function(1.0, 1, a)
    g = radial.s_function(1.0, 0, 1.0)
    fg = radial.inner_product(f, g, k)
    assert fg * fg <= radial.inner_product(f, f, k) * radial.inner_product(g, g, k) * (1 + 1e-12)


def test_combine_and_arithmetic():
    f = radial.s_function(1.0, 1, 1.0)
    g = radial.combine([(2.0, f), (-1.0, f)])
    assert radial.inner_product(g, g) == pytest.approx(radial.inner_product(f, f))
    with pytest.raises(DomainError):
        radial.combine([])
