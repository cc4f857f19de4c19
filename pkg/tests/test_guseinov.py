from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from onerange import guseinov as G, radial
from onerange.errors import DomainError
from onerange.guseinov import GuseinovIndex, StfIndex


@pytest.mark.parametrize("bad", [(0, 0, 0, 0, 1), (2, 2, 0, 0, 1), (3, 1, 2, 0, 1), (2, 0, 0, -2, 1), (2, 0, 0, 0, 0)])
def test_index_invariants(bad):
    with pytest.raises(DomainError):
        GuseinovIndex(*bad)


@pytest.mark.parametrize("k", [-1, 0, 1, 2])
def test_ground_state_unit_norm(k):
    psi = G.psi_build(GuseinovIndex(1, 0, 0, k, 1.0))
    assert len(psi.radial.terms) == 1
    assert radial.inner_product(psi, psi, k) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("k", [-1, 0, 1, 2])
def test_exact_off_diagonal_zero(k):
    f, nf = G.psi_build_unnormalized(GuseinovIndex(2, 0, 0, k, Fraction(1)))
    g, ng = G.psi_build_unnormalized(GuseinovIndex(1, 0, 0, k, Fraction(1)))
    assert radial.inner_product(f, g, k) == 0


def test_gram_exact_is_kronecker_delta():
    gram = G.gram_exact(1, Fraction(1, 2), 5)
    for (a, b), v in gram.items():
        assert v == (1 if a == b else 0)


def test_stf_build_and_yukawa_identity():
    chi = G.stf_build(StfIndex(1, 0, 0, 2.0))
    assert chi.radial.terms == ((1.0, 0.0, 2.0),)
    c, idx = G.yukawa_as_stf(1.5)
    chi0 = G.stf_build(idx)
    r = np.array([0.3, 1.0, 4.0])
    assert np.allclose(c * chi0.radial(r), radial.yukawa(1.5).radial(r), rtol=1e-14)
    assert not radial.membership(G.stf_build(StfIndex(0, 0, 0, 1.0)), -1)[0]


@pytest.mark.parametrize("n,ell,k", [(1, 0, 0), (3, 0, -1), (4, 2, 1), (6, 1, 2)])
def test_psi_to_stf_pointwise(n, ell, k):
    idx = GuseinovIndex(n, ell, 0, k, 1.3)
    terms = G.psi_to_stf(idx)
    assert len(terms) == n - ell
    r = np.array([0.1, 1.0, 5.0])
    rebuilt = sum(c * G.stf_build(s).radial(r) for c, s in terms)
    direct = G.psi_build(idx).radial(r)
    assert np.allclose(rebuilt, direct, rtol=1e-12, atol=0)


@pytest.mark.parametrize("k", [-1, 0, 2])
def test_conversion_matrix_bt_s_b_identity(k):
    ell, n_max, beta = 1, 5, Fraction(1)
    B = G.conversion_matrix(k, beta, ell, n_max).as_float()
    chis = [G.stf_build(StfIndex(j + ell + 1, ell, 0, beta)) for j in range(n_max - ell)]
    S = np.array([[float(radial.inner_product(a, b, k)) for b in chis] for a in chis])
    assert np.allclose(B @ S @ B.T, np.eye(n_max - ell), atol=1e-10)


def test_conversion_matrix_exact_inverse():
    cm = G.conversion_matrix(0, 1, 0, 6)
    inv = cm.inverse_rows()
    size = len(cm.rows)
    for i in range(size):
        for j in range(size):
            s = sum(inv[i][t] * cm.rows[t][j] for t in range(size))
            assert s == (1 if i == j else 0)


def test_conversion_matrix_cached():
    assert G.conversion_matrix(0, 1, 0, 4) is G.conversion_matrix(0, 1, 0, 4)


@given(st.integers(1, 12), st.integers(-1, 2), st.floats(0.3, 3), st.floats(0.3, 3), st.floats(0.05, 6))
def test_scaling_covariance(n, k, b1, b2, r):
    a = G.psi_radial(n, 0, k, b1, [r])[0]
    b = (b1 / b2) ** ((k + 3) / 2) * G.psi_radial(n, 0, k, b2, [b1 / b2 * r])[0]
    assert a == pytest.approx(b, rel=1e-9, abs=1e-13)


def test_psi_table_matches_psi_radial():
    r = np.array([0.2, 1.5, 7.0, 40.0])
    tab = G.psi_table(30, 2, 1, 0.8, r)
    for nu in (0, 5, 30):
        assert np.allclose(tab[nu], G.psi_radial(nu + 3, 2, 1, 0.8, r), rtol=1e-10, atol=1e-300)


def test_psi_moments_equal_weighted_table_sum():
    r = np.linspace(0.1, 20, 50)
    w = np.cos(r)
    tab = G.psi_table(40, 1, 0, 1.2, r)
    assert np.allclose(G.psi_moments(40, 1, 0, 1.2, r, weights=w), tab @ w, rtol=1e-10, atol=1e-14)


@pytest.mark.parametrize("k", [-1, 0, 1, 2])
def test_gram_quadrature_small(k):
    idxs, gram = G.gram_quadrature(k, 0.5, 5)
    assert np.abs(gram - np.eye(len(idxs))).max() < 1e-8
