"""The eleven acceptance criteria, each at its stated tolerance.

Every criterion records a PASS/FAIL line (collected in the terminal summary).
A criterion that cannot be met as literally stated keeps its literal check as
a strict xfail next to the attainable parts.
"""
import math
import random
import time
from fractions import Fraction

import numpy as np
import pytest

from onerange import addition as A, convergence as C, expansions as E, fourier as F
from onerange import guseinov as G, radial, rearrange as R
from onerange.expansions import TruncatedExpansion
from onerange.guseinov import GuseinovIndex, StfIndex
from onerange.specfun import laguerre_eval_exact, laguerre_table


def test_01_guseinov_orthonormality(acceptance):
    t0 = time.perf_counter()
    exact_dev, quad_dev = 0, 0.0
    for k in (-1, 0, 1, 2):
        for beta in (Fraction(1, 2), Fraction(1), Fraction(2)):
            gram = G.gram_exact(k, beta, 8)
            exact_dev = max(exact_dev, max(abs(v - (1 if a == b else 0)) for (a, b), v in gram.items()))
            idxs, Q = G.gram_quadrature(k, float(beta), 8)
            quad_dev = max(quad_dev, float(np.abs(Q - np.eye(len(idxs))).max()))
    elapsed = time.perf_counter() - t0
    ok = exact_dev == 0 and quad_dev < 1e-8 and elapsed < 30
    acceptance(1, ok, f"rational deviation {exact_dev}, quadrature {quad_dev:.2e}, {elapsed:.1f} s")
    assert exact_dev == 0
    assert quad_dev < 1e-8
    assert elapsed < 30


def test_02_laguerre_orthogonality(acceptance):
    worst = 0.0
    for alpha in (-0.5, 0.0, 1.0, 2.5):
        x, logw = radial.genlaguerre_log_rule(40, alpha)
        L = laguerre_table(12, alpha, x)
        M = (L * np.exp(logw)) @ L.T
        h = np.exp([math.lgamma(alpha + n + 1) - math.lgamma(n + 1) for n in range(13)])
        worst = max(worst, float(np.abs(M / np.sqrt(np.outer(h, h)) - np.eye(13)).max()))
    acceptance(2, worst < 1e-9, f"max relative deviation {worst:.2e}")
    assert worst < 1e-9


def test_03_termination(acceptance):
    worst, terminated = 0.0, True
    for N in (1, 2, 3):
        for L in range(N):
            chi = G.stf_build(StfIndex(N, L, 0, 1.0))
            for s in (E.stf_in_guseinov_equal_scale(N, L, 0, 0, 1.0),
                      E.stf_in_guseinov_diff_scale(N, L, 0, 0, 1.0, 1.0)):
                c = s.coeffs(N - L + 4)
                terminated &= s.terminates_at == N - L - 1 and bool(np.all(c[N - L:] == 0))
                t = TruncatedExpansion(s, N - L - 1)
                for r in (0.1, 1.0, 5.0):
                    ref = float(chi.radial([r])[0])
                    worst = max(worst, abs(E.evaluate_truncated(t, r) - ref) / abs(ref))
    ok = terminated and worst < 1e-10
    acceptance(3, ok, f"terminate at N-L-1: {terminated}, pointwise rel {worst:.2e} (different-scale at gamma = beta)")
    assert terminated and worst < 1e-10


def test_03_different_scale_converges_when_gamma_differs():
    # with gamma != beta the stream cannot terminate; its truncations converge instead
    s = E.stf_in_guseinov_diff_scale(2, 0, 0, 0, 1.0, 1.4)
    assert s.terminates_at is None
    chi = G.stf_build(StfIndex(2, 0, 0, 1.0))
    ref = float(chi.radial([1.0])[0])
    errs = [abs(E.evaluate_truncated(TruncatedExpansion(s, n), 1.0) - ref) for n in (4, 8, 16)]
    assert errs[0] > errs[1] > errs[2] and errs[2] < 1e-6 * abs(ref)


def test_04_parseval_audit(acceptance):
    v = C.classify(E.yukawa_in_guseinov(0, 1.0))
    rel = abs(v.parseval_estimate - 2 * math.pi) / (2 * math.pi)
    audit = E.yukawa_prefactor_audit()
    ok = rel < 1e-4 and audit["selected"] == "equal_scale" and audit["passed"]
    acceptance(4, ok, f"sum |c|^2 = {v.parseval_estimate:.10f} (rel {rel:.1e}), selected {audit['selected']}")
    assert rel < 1e-4
    assert audit["selected"] == "equal_scale" and audit["passed"]


def test_05_divergence_classification(acceptance):
    got = {f"yukawa k={k}": C.classify(E.yukawa_in_guseinov(k, 1.0)).kind for k in (-1, 0, 1, 2)}
    policy = C.ClassifyPolicy(start=32, doublings=5)
    for k in (-1, 0, 1, 2):
        got[f"coulomb field k={k}"] = C.classify(A.coulomb_field_stream(k, 1.0, 0.5), policy).kind
    want = {"yukawa k=-1": C.DIVERGENT, "yukawa k=0": C.CONVERGENT, "yukawa k=1": C.CONVERGENT,
            "yukawa k=2": C.CONVERGENT}
    want.update({f"coulomb field k={k}": C.DIVERGENT for k in (-1, 0, 1, 2)})
    bad = [key for key in want if got[key] != want[key]]
    acceptance(5, not bad, "all eight verdicts as expected" if not bad else f"mismatch {bad}")
    assert got == want


def test_06_decay_law(acceptance):
    fits = {k: C.decay_exponent(E.yukawa_in_guseinov(k, 1.0), (64, 512)).exponent for k in (0, 1, 2)}
    worst = max(abs(e + k + 2) for k, e in fits.items())
    acceptance(6, worst <= 0.1, "exponents " + ", ".join(f"k={k}: {e:.4f}" for k, e in fits.items()))
    assert worst <= 0.1


def test_07_rearrangement(acceptance):
    rng = random.Random(20261016)
    roundtrip = True
    for _ in range(25):
        N = rng.randint(0, 10)
        alpha = rng.choice([Fraction(0), Fraction(1, 2), Fraction(3), Fraction(-1, 2)])
        lam = [Fraction(rng.randint(-20, 20), rng.randint(1, 9)) for _ in range(N + 1)]
        res = R.rearrange_finite(lam, alpha)
        for x in (Fraction(0), Fraction(2, 3), Fraction(7, 2)):
            direct = sum(c * laguerre_eval_exact(n, alpha, x) for n, c in enumerate(lam))
            roundtrip &= R.polynomial_value(res.coeffs, x) == direct
    divergent = True
    for mu in (0.5, 1.5):
        for u in (0.0, 0.3):
            s = E.exppower_in_laguerre(mu, 0, u)
            statuses = [R.rearrange_infinite_probe(s, nu).status for nu in range(3)]
            divergent &= any(isinstance(st, R.DivergentInnerSeries) for st in statuses)
    taylor_exact, taylor_err = True, 0.0
    for mu in (0, 1, 2, 3):
        stream = E.power_in_laguerre(mu, 0)
        res = R.power_series_from_stream(stream, 4)
        taylor_exact &= all(isinstance(st, R.Finite) for st in res.statuses)
        # exact path: the terminating stream's rational coefficients rearranged in Fractions
        lam = [Fraction(stream.prefactor) * stream.reduced_exact(n) for n in range(stream.terminates_at + 1)]
        taylor_exact &= R.rearrange_finite(lam, 0).coeffs == [1 if nu == mu else 0 for nu in range(mu + 1)]
        taylor_err = max(taylor_err, max(abs(c - (nu == mu)) for nu, c in enumerate(res.coeffs)))
        u = 0.3
        res = R.power_series_from_stream(E.exppower_in_laguerre(mu, 0, u), 5)
        taylor_exact &= all(isinstance(st, R.Finite) for st in res.statuses)
        ref = [u ** (nu - mu) / math.factorial(nu - mu) if nu >= mu else 0.0 for nu in range(6)]
        taylor_err = max(taylor_err, max(abs(a - b) for a, b in zip(res.coeffs, ref)))
    ok = roundtrip and divergent and taylor_exact and taylor_err < 1e-9
    acceptance(7, ok, f"round-trip exact {roundtrip}, divergent probes {divergent}, "
                      f"monomials exact {taylor_exact}, e^(0.3x) Taylor error {taylor_err:.1e}")
    assert ok


def test_08_weak_convergence(acceptance):
    s = E.coulomb_in_guseinov(0, 1.0)
    w = C.weak_inner_product(s, radial.s_function(1, 0, 1.0), n_max=1024)
    err = abs(w.value - 4 * math.pi)
    exact = True
    for n in range(1, 9):
        wi = C.weak_inner_product(s, G.psi_build(GuseinovIndex(n, 0, 0, 0, 1.0)))
        exact &= wi.converged and len(wi.partial_sums) == 1 and wi.value == pytest.approx(s.coeff_at(n - 1), rel=1e-13)
    ok = w.converged and err < 1e-6 and exact
    acceptance(8, ok, f"(1/r | e^-r) = {w.value:.12f}, |error| {err:.1e}; basis elements exact {exact}")
    assert ok


def test_09_exppower_regime_boundary(acceptance):
    mu, alpha = 0.5, 0
    v3 = C.classify(E.exppower_in_laguerre(mu, alpha, 0.3))
    ref = math.gamma(2 * mu + 1) / (1 - 2 * 0.3) ** (2 * mu + 1)
    rel = abs(v3.parseval_estimate - ref) / ref
    v7 = C.classify(E.exppower_in_laguerre(mu, alpha, 0.7))
    ok = v3.kind == C.CONVERGENT and rel < 1e-4 and v7.kind == C.DIVERGENT
    acceptance(9, ok, f"u=0.3 sum {v3.parseval_estimate:.10f} vs {ref} (rel {rel:.1e}); u=0.7 {v7.kind}")
    assert ok


def _criterion_10_parts():
    f = F.pure_exponential(1.0)
    coul = F.interaction_integral(f, f, 0.0)
    study = F.beta_limit_study(f, f, [0.1, 0.01, 0.001, 1e-4])
    gap = {b: abs(v - coul) for b, v, _ in study.rows}
    dens = [F.pure_exponential(0.5), F.pure_exponential(1.0), F.exp_times_r(1.0), F.exp_times_r(2.0)]
    planch = max(F.plancherel_check(a, b)["relative_difference"] for a in dens for b in dens)
    return coul, study, gap, planch


def test_10_coulomb_interaction(acceptance):
    coul, study, gap, planch = _criterion_10_parts()
    rel = abs(coul - 20 * math.pi ** 2) / (20 * math.pi ** 2)
    literal = gap[1e-3] < 1e-4
    acceptance(10, rel < 1e-6 and literal and planch < 1e-8,
               f"C = 20 pi^2 to {rel:.1e}; Plancherel {planch:.1e}; |Y(1e-3) - C| = {gap[1e-3]:.3f} "
               f"(C - Y ~ 64 pi^2 beta, so < 1e-4 needs beta < 1.6e-7); extrapolated limit rel "
               f"{study.details['relative_gap']:.1e}")
    # attainable parts
    assert rel < 1e-6
    assert planch < 1e-8
    assert study.verdict == "continuous"
    assert gap[1e-3] == pytest.approx(64 * math.pi ** 2 * 1e-3, rel=1e-2)


@pytest.mark.xfail(strict=True, reason="C - Y(beta) = 64 pi^2 beta + O(beta^2) for the e^-r pair: 0.63 at beta = 1e-3")
def test_10_literal_beta_gap():
    _, _, gap, _ = _criterion_10_parts()
    assert gap[1e-3] < 1e-4


def test_11_two_center_ladder(acceptance):
    t0 = time.perf_counter()
    chi = G.stf_build(StfIndex(1, 0, 0, 1.0))
    orders = [(4, 2), (8, 4), (12, 6)]
    base = A.TwoCenterConfig(chi, 0, 1.0, 0.5)
    norm = A.displaced_norm_sq(base)
    beta = A.variational_scale(base, *orders[0])
    cfg = A.TwoCenterConfig(chi, 0, beta, 0.5)
    rel = [s.mse / norm for s in A.mse_ladder(cfg, orders)]
    rel_unit = [s.mse / norm for s in A.mse_ladder(base, orders)]
    lim = A.one_center_limit(A.TwoCenterConfig(chi, 0, 1.0, 0.0), 12, 6)
    one = A.coefficient_field(A.TwoCenterConfig(chi, 0, 1.0, 0.0), 12, 6).values
    limit_err = max(abs(lim[key] - one[key]) for key in one)
    elapsed = time.perf_counter() - t0
    monotone = all(b < a for a, b in zip(rel, rel[1:]))
    ok = monotone and rel[-1] < 1e-4 and limit_err < 1e-6 and elapsed < 300
    acceptance(11, ok, f"basis beta {beta:.4f}: relative MSE " + ", ".join(f"{x:.2e}" for x in rel)
               + f" (beta = 1 gives {rel_unit[-1]:.2e}); d -> 0 error {limit_err:.1e}; {elapsed:.0f} s")
    assert monotone
    assert all(b < a for a, b in zip(rel_unit, rel_unit[1:]))
    assert rel[-1] < 1e-4
    assert limit_err < 1e-6
    assert elapsed < 300
