"""Closed-form coefficient streams for orthogonal expansions.

Streams cover Slater-type functions in Guseinov functions (equal and
different scaling parameter), the Yukawa and Coulomb potentials, and the
Laguerre expansions of x^mu and x^mu e^{ux}.  Every stream keeps its
nu-independent prefactor apart from the nu-dependent factor; the latter is
evaluated in log space so large indices do not overflow.

Terminating Gauss sums 2F1(-n, s; a+1; 1/(1-u)) are obtained from the
generating function

    sum_n (a+1)_n/n! 2F1(-n, s; a+1; 1/(1-u)) t^n = (1-t)^{s-a-1} (1 + w t)^{-s},
    w = u/(1-u),

i.e. as a convolution of two binomial series.  For |w| <= 1 the convolution
has no catastrophic cancellation, unlike the alternating 2F1 sum itself.
"""
from __future__ import annotations

import csv
import io
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Callable

import numpy as np

from . import radial
from .errors import DivergentTargetError, DomainError
from .guseinov import GuseinovIndex, GuseinovRadial, StfIndex, psi_moments, psi_table, stf_build
from .radial import SphericalFunction
from .specfun import hyp2f1_terminating, laguerre_table, log_pochhammer, pochhammer

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GuseinovBasis:
    """psi_{nu+ell+1, ell}^m(beta, .) for nu = 0, 1, 2, ... in L^2_{r^k}."""

    k: int
    beta: float
    ell: int = 0
    m: int = 0

    kind = "guseinov"

    def norm_sq(self, nu: np.ndarray) -> np.ndarray:
        return np.ones_like(np.asarray(nu, dtype=float))

    def values(self, n_max: int, r) -> np.ndarray:
        """Radial factors of the first n_max+1 basis functions at ``r``."""
        return psi_table(n_max, self.ell, self.k, self.beta, r)

    def index(self, nu: int) -> GuseinovIndex:
        return GuseinovIndex(nu + self.ell + 1, self.ell, self.m, self.k, self.beta)

    def describe(self) -> dict:
        return {"kind": self.kind, "k": self.k, "beta": float(self.beta), "ell": self.ell, "m": self.m}


@dataclass(frozen=True)
class LaguerreBasis:
    """Unnormalized L_nu^(alpha)(x) in L^2_{e^{-x} x^alpha}(R_+)."""

    alpha: float

    kind = "laguerre"

    def norm_sq(self, nu: np.ndarray) -> np.ndarray:
        nu = np.asarray(nu, dtype=float)
        return np.exp(_gammaln(nu + self.alpha + 1) - _gammaln(nu + 1))

    def values(self, n_max: int, x) -> np.ndarray:
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return laguerre_table(n_max, float(self.alpha), x)

    def describe(self) -> dict:
        return {"kind": self.kind, "alpha": float(self.alpha)}


def _gammaln(x):
    from scipy.special import gammaln

    return gammaln(x)


@dataclass(eq=False)
class CoefficientStream:
    """Lazy map nu -> c_nu on a basis, with c_nu = prefactor * factor(nu).

    ``factor_block(n_max)`` returns the nu-dependent factors for
    nu = 0..n_max as an array.  ``reduced_exact`` optionally gives the same
    factors as exact rationals.  ``formal`` marks expansions of functions
    outside the Hilbert space (divergent in the mean by construction).
    """

    basis: object
    prefactor: float
    factor_block: Callable[[int], np.ndarray]
    target: dict
    target_function: SphericalFunction | None = None
    target_norm_sq: float | None = None
    formal: bool = False
    terminates_at: int | None = None
    reduced_exact: Callable[[int], Fraction] | None = None
    # float factor left out of reduced_exact (irrational square roots), 1 if None
    exact_residual: Callable[[int], float] | None = None
    notes: list = field(default_factory=list)
    _cache: np.ndarray = field(default=None, repr=False)

    def coeffs(self, n_max: int) -> np.ndarray:
        if n_max < 0:
            return np.zeros(0)
        if self._cache is None or len(self._cache) <= n_max:
            size = max(n_max + 1, 2 * (0 if self._cache is None else len(self._cache)), 64)
            self._cache = self.prefactor * np.asarray(self.factor_block(size - 1), dtype=float)
            if self.terminates_at is not None:
                self._cache[self.terminates_at + 1 :] = 0.0
        return self._cache[: n_max + 1].copy()

    def coeff_at(self, nu: int) -> float:
        if nu < 0:
            raise DomainError("negative index")
        if self.terminates_at is not None and nu > self.terminates_at:
            return 0.0
        return float(self.coeffs(nu)[nu])

    def weighted_sq(self, n_max: int) -> np.ndarray:
        """|c_nu|^2 times the basis norm (1 for orthonormal bases)."""
        c = self.coeffs(n_max)
        with np.errstate(over="ignore"):
            return c * c * self.basis.norm_sq(np.arange(n_max + 1))

    def exact_coeff(self, nu: int):
        """(prefactor, exact reduced factor) or None when no exact path exists."""
        if self.reduced_exact is None:
            return None
        return self.prefactor, self.reduced_exact(nu)

    def exact_float(self, nu: int) -> float | None:
        """c_nu rebuilt from the exact reduced factor, for cross-checks."""
        if self.reduced_exact is None:
            return None
        res = 1.0 if self.exact_residual is None else self.exact_residual(nu)
        return self.prefactor * float(self.reduced_exact(nu)) * res

    def describe(self) -> dict:
        return {
            "basis": self.basis.describe(),
            "target": self.target,
            "prefactor": self.prefactor,
            "formal": self.formal,
            "terminating": self.terminates_at is not None,
            "terminates_at": self.terminates_at,
            "notes": list(self.notes),
        }


@dataclass(frozen=True)
class TruncatedExpansion:
    stream: CoefficientStream
    order: int

    def __post_init__(self):
        if self.order < 0:
            raise DomainError("truncation order must be >= 0")


# --- nu-dependent factor helpers -------------------------------------------


def _log_pochhammer_vec(a: float, n_max: int) -> tuple[np.ndarray, np.ndarray]:
    signs = np.empty(n_max + 1)
    logs = np.empty(n_max + 1)
    for nu in range(n_max + 1):
        s, l = log_pochhammer(a, nu)
        signs[nu], logs[nu] = s, l
    return signs, logs


def binomial_series_product(mu: float, s: float, w: float, n_max: int) -> np.ndarray:
    """Taylor coefficients of (1-t)^mu (1+w t)^{-s}, nu = 0..n_max."""
    a = np.empty(n_max + 1)
    b = np.empty(n_max + 1)
    a[0] = b[0] = 1.0
    # |w| > 1 makes b grow geometrically; overflow to inf is the honest answer there
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(n_max):
            a[j + 1] = a[j] * (j - mu) / (j + 1)
            b[j + 1] = b[j] * (s + j) * (-w) / (j + 1)
        return np.convolve(a, b)[: n_max + 1]


def hyp2f1_block(n_max: int, s: float, c: float, z: float) -> np.ndarray:
    """2F1(-n, s; c; z) for n = 0..n_max via the generating-function route (z != 0)."""
    u = 1.0 - 1.0 / z
    w = u / (1.0 - u)
    g = binomial_series_product(s - c, s, w, n_max)
    nu = np.arange(n_max + 1)
    # n!/(c)_n
    lograt = _gammaln(nu + 1) + _gammaln(c) - _gammaln(nu + c)
    return np.exp(lograt) * g


def _stf_member(N: float, k: int) -> bool:
    return 2 * N + k > -1


def _require_member(member: bool, formal: bool, what: str):
    if not member and not formal:
        raise DivergentTargetError(f"{what} is not a member of the space; pass formal=True for a formal stream")


# --- streams ------------------------------------------------------------------


def stf_in_guseinov_equal_scale(N, L: int, M: int, k: int, beta, formal: bool = False) -> CoefficientStream:
    """chi_{N,L}^M(beta) in psi_{nu+L+1,L}^M(beta) with the same scaling parameter."""
    member = _stf_member(N, k)
    _require_member(member, formal, f"chi_(N={N}, L={L})")
    beta_f = float(beta)
    a = 2 * L + k + 2
    s = float(N) + L + k + 2
    if s <= 0 and s == math.floor(s):
        raise DomainError("Gamma(N+L+k+2) has a pole")
    pref = (2 * beta_f) ** (-(k + 3) / 2) * 2.0 ** (1 - float(N)) * math.gamma(s)
    mu = float(N) - L - 1

    def block(n_max: int) -> np.ndarray:
        signs, logp = _log_pochhammer_vec(-mu, n_max)
        nu = np.arange(n_max + 1)
        with np.errstate(invalid="ignore"):
            logf = logp - 0.5 * (_gammaln(nu + a + 1) + _gammaln(nu + 1))
            return np.where(signs == 0, 0.0, signs * np.exp(logf))

    term = None
    reduced = None
    if float(N) == int(N) and int(N) >= L + 1:
        term = int(N) - L - 1
    if isinstance(N, Rational):
        def reduced(nu: int) -> Fraction:
            # exact part (-N+L+1)_nu / nu!; the remaining sqrt(nu!/(nu+a)!) is irrational
            return pochhammer(-Fraction(N) + L + 1, nu) / math.factorial(nu)

    tnorm = _stf_norm_sq(N, k, beta_f) if member else math.inf
    return CoefficientStream(
        basis=GuseinovBasis(k, beta_f, L, M),
        prefactor=pref,
        factor_block=block,
        target={"kind": "stf", "N": float(N), "L": L, "M": M, "beta": beta_f},
        target_function=stf_build(StfIndex(N, L, M, beta)),
        target_norm_sq=tnorm,
        formal=not member,
        terminates_at=term,
        reduced_exact=reduced,
        exact_residual=lambda nu: math.exp(0.5 * (math.lgamma(nu + 1) - math.lgamma(nu + a + 1))),
    )


def _stf_norm_sq(N, k: int, beta: float) -> float:
    # integral beta^{2N-2} r^{2N-2+k+2} e^{-2 beta r} dr
    return beta ** (2 * float(N) - 2) * radial.radial_moment(2 * float(N) + k, 2 * beta)


def stf_in_guseinov_diff_scale(N, L: int, M: int, k: int, beta, gamma, formal: bool = False) -> CoefficientStream:
    """chi_{N,L}^M(beta) in psi_{nu+L+1,L}^M(gamma), beta and gamma independent.

    c_nu = (2g)^{L+(k+3)/2} b^{N-1} (b+g)^{-(N+L+k+2)} Gamma(N+L+k+2)/(2L+k+2)!
           * [(nu+2L+k+2)!/nu!]^{1/2} 2F1(-nu, N+L+k+2; 2L+k+3; 2g/(b+g))
    """
    if not (beta > 0 and gamma > 0):
        raise DomainError("scaling parameters must be positive")
    member = _stf_member(N, k)
    _require_member(member, formal, f"chi_(N={N}, L={L})")
    b, g = float(beta), float(gamma)
    a = 2 * L + k + 2
    s = float(N) + L + k + 2
    mu = float(N) - L - 1
    w = (g - b) / (b + g)
    logpref = (L + (k + 3) / 2) * math.log(2 * g) + (float(N) - 1) * math.log(b) - s * math.log(b + g)
    pref = math.exp(logpref) * math.gamma(s) / math.factorial(a)

    def block(n_max: int) -> np.ndarray:
        nu = np.arange(n_max + 1)
        # [(nu+a)!/nu!]^{1/2} * nu!/(a+1)_nu = a! [nu!/(nu+a)!]^{1/2}
        logsq = 0.5 * (_gammaln(nu + 1) - _gammaln(nu + a + 1)) + math.lgamma(a + 1)
        return np.exp(logsq) * binomial_series_product(mu, s, w, n_max)

    term = None
    if g == b and float(N) == int(N) and int(N) >= L + 1:
        term = int(N) - L - 1
    tnorm = _stf_norm_sq(N, k, b) if member else math.inf
    return CoefficientStream(
        basis=GuseinovBasis(k, g, L, M),
        prefactor=pref,
        factor_block=block,
        target={"kind": "stf", "N": float(N), "L": L, "M": M, "beta": b, "basis_beta": g},
        target_function=stf_build(StfIndex(N, L, M, beta)),
        target_norm_sq=tnorm,
        formal=not member,
        terminates_at=term,
        notes=["2F1 factors from the generating function (1-t)^(N-L-1) (1+wt)^-(N+L+k+2), w=(g-b)/(b+g)"],
    )


def diff_scale_hyp2f1_direct(N, L: int, k: int, beta, gamma, nu: int):
    """Single coefficient from the explicit terminating 2F1 (independent check)."""
    a = 2 * L + k + 2
    s = N + L + k + 2
    z = 2 * gamma / (beta + gamma) if isinstance(gamma, Rational) else 2.0 * gamma / (beta + gamma)
    F = hyp2f1_terminating(nu, s, a + 1, z)
    b, g = float(beta), float(gamma)
    logpref = (L + (k + 3) / 2) * math.log(2 * g) + (float(N) - 1) * math.log(b) - float(s) * math.log(b + g)
    pref = math.exp(logpref) * math.gamma(float(s)) / math.factorial(a)
    return pref * math.exp(0.5 * (math.lgamma(nu + a + 1) - math.lgamma(nu + 1))) * float(F)


def power_in_laguerre(mu, alpha) -> CoefficientStream:
    """x^mu = Gamma(mu+a+1)/Gamma(a+1) sum_n (-mu)_n/(a+1)_n L_n^(a)(x)."""
    if not alpha > -1 or not mu + alpha > -1:
        raise DomainError("need alpha > -1 and mu + alpha > -1")
    mu_f, a_f = float(mu), float(alpha)
    term = int(mu_f) if mu_f == int(mu_f) and mu_f >= 0 else None
    if term is not None and isinstance(alpha, Rational):
        # Gamma(mu+a+1)/Gamma(a+1) = (a+1)_mu, kept exact for integer mu
        pref = float(pochhammer(Fraction(alpha) + 1, term))
    else:
        pref = math.exp(math.lgamma(mu_f + a_f + 1) - math.lgamma(a_f + 1))

    def block(n_max: int) -> np.ndarray:
        out = np.empty(n_max + 1)
        out[0] = 1.0
        for n in range(n_max):
            out[n + 1] = out[n] * (n - mu_f) / (a_f + 1 + n)
        return out

    reduced = None
    if isinstance(mu, Rational) and isinstance(alpha, Rational):
        def reduced(n: int) -> Fraction:
            return pochhammer(-Fraction(mu), n) / pochhammer(Fraction(alpha) + 1, n)

    member = 2 * mu_f + a_f > -1
    return CoefficientStream(
        basis=LaguerreBasis(alpha),
        prefactor=pref,
        factor_block=block,
        target={"kind": "power", "mu": mu_f, "alpha": a_f, "u": 0.0},
        target_norm_sq=math.gamma(2 * mu_f + a_f + 1) if member else math.inf,
        formal=not member,
        terminates_at=term,
        reduced_exact=reduced,
    )


def exppower_in_laguerre(mu, alpha, u) -> CoefficientStream:
    """x^mu e^{ux} = (1-u)^{-a-mu-1} Gamma(a+mu+1)/Gamma(a+1) sum_n 2F1(-n, a+mu+1; a+1; 1/(1-u)) L_n^(a)(x).

    Converges in the mean only for u < 1/2; larger u gives a formal stream.
    """
    if not alpha > -1 or not mu + alpha > -1:
        raise DomainError("need alpha > -1 and mu + alpha > -1")
    if u == 1:
        raise DomainError("u = 1 is a pole of the prefactor")
    if u > 1:
        raise DomainError("u > 1 makes the prefactor (1-u)^(-a-mu-1) non-real")
    if u == 0:
        stream = power_in_laguerre(mu, alpha)
        stream.target["u"] = 0.0
        return stream
    mu_f, a_f, u_f = float(mu), float(alpha), float(u)
    s = a_f + mu_f + 1
    w = u_f / (1 - u_f)
    pref = math.exp(-s * math.log(1 - u_f) + math.lgamma(s) - math.lgamma(a_f + 1))

    def block(n_max: int) -> np.ndarray:
        n = np.arange(n_max + 1)
        lograt = _gammaln(n + 1) + math.lgamma(a_f + 1) - _gammaln(n + a_f + 1)
        return np.exp(lograt) * binomial_series_product(mu_f, s, w, n_max)

    reduced = None
    if all(isinstance(v, Rational) for v in (mu, alpha, u)):
        z = 1 / (1 - Fraction(u))

        def reduced(n: int) -> Fraction:
            return hyp2f1_terminating(n, Fraction(alpha) + Fraction(mu) + 1, Fraction(alpha) + 1, z)

    member = u_f < 0.5 and 2 * mu_f + a_f > -1
    norm = math.gamma(2 * mu_f + a_f + 1) / (1 - 2 * u_f) ** (2 * mu_f + a_f + 1) if member else math.inf
    return CoefficientStream(
        basis=LaguerreBasis(alpha),
        prefactor=pref,
        factor_block=block,
        target={"kind": "exppower", "mu": mu_f, "alpha": a_f, "u": u_f},
        target_norm_sq=norm,
        formal=not member,
        reduced_exact=reduced,
    )


# --- Yukawa prefactor audit -----------------------------------------------------

YUKAWA_PREFACTOR_CANDIDATES = {
    # as printed for the Yukawa special case
    "printed": lambda k, beta: math.sqrt(2 * math.pi / (2 * beta) ** (k + 1)),
    # sqrt(4 pi) beta times the equal-scale N=L=M=0 prefactor
    "equal_scale": lambda k, beta: math.sqrt(4 * math.pi / (2 * beta) ** (k + 1)),
}


def _yukawa_reduced_sq_sum(k: int, n_max: int) -> float:
    """sum_{nu<=n_max} Gamma(k+2)^2 nu!/(nu+k+2)!, plus the tail from the doubling continuation."""
    nu = np.arange(n_max + 1)
    sq = math.gamma(k + 2) ** 2 * np.exp(_gammaln(nu + 1) - _gammaln(nu + k + 3))
    cs = np.cumsum(sq)
    half = n_max // 2
    d1 = cs[n_max] - cs[half]
    d0 = cs[half] - cs[half // 2]
    ratio = d1 / d0
    return float(cs[n_max] + d1 * ratio / (1 - ratio))


@lru_cache(maxsize=None)
def yukawa_prefactor_audit(beta: float = 1.0, n_max: int = 1 << 14) -> dict:
    """Pick the Yukawa prefactor whose Parseval sum matches ||e^{-br}/r||^2 at k=0."""
    norm_sq = radial.norm_and_membership(radial.yukawa(beta), 0)[0]
    reduced = _yukawa_reduced_sq_sum(0, n_max)
    results = {}
    for name, fn in YUKAWA_PREFACTOR_CANDIDATES.items():
        est = fn(0, beta) ** 2 * reduced
        results[name] = {"parseval_estimate": est, "relative_error": abs(est / norm_sq - 1)}
    selected = min(results, key=lambda n: results[n]["relative_error"])
    return {
        "k": 0,
        "beta": beta,
        "norm_sq_target": norm_sq,
        "candidates": results,
        "selected": selected,
        "passed": results[selected]["relative_error"] < 1e-4,
    }


def yukawa_in_guseinov(k: int, beta) -> CoefficientStream:
    """exp(-beta r)/r in psi_{nu+1,0}^0(beta); formal for k = -1."""
    if int(k) != k or k < -1:
        raise DomainError("k must be an integer >= -1")
    if not beta > 0:
        raise DomainError("beta must be positive")
    audit = yukawa_prefactor_audit()
    b = float(beta)
    pref = YUKAWA_PREFACTOR_CANDIDATES[audit["selected"]](k, b) * math.gamma(k + 2)

    def block(n_max: int) -> np.ndarray:
        nu = np.arange(n_max + 1)
        # nu!/[(nu+k+2)! nu!]^{1/2} = [nu!/(nu+k+2)!]^{1/2}
        return np.exp(0.5 * (_gammaln(nu + 1) - _gammaln(nu + k + 3)))

    yuk = radial.yukawa(b)
    norm, member, _ = radial.norm_and_membership(yuk, k)
    return CoefficientStream(
        basis=GuseinovBasis(k, b, 0, 0),
        prefactor=pref,
        factor_block=block,
        target={"kind": "yukawa", "beta": b},
        target_function=yuk,
        target_norm_sq=norm,
        formal=not member,
        notes=[f"prefactor selected by Parseval audit: {audit['selected']}"],
    )


def coulomb_in_guseinov(k: int, beta) -> CoefficientStream:
    """Formal expansion of 1/r in psi_{nu+1,0}^0(beta) (never convergent in the mean).

    c_nu = sqrt(4 pi) (2b)^{(k+3)/2} b^{-(k+2)} Gamma(k+2) [nu!/(nu+k+2)!]^{1/2} g_nu,
    g_nu = sum_{j<=nu} (-1)^j C(j+k+1, k+1)   (integers, summed exactly).
    """
    if int(k) != k or k < -1:
        raise DomainError("k must be an integer >= -1")
    b = float(beta)
    pref = radial.SQRT_4PI * (2 * b) ** ((k + 3) / 2) * b ** (-(k + 2)) * math.gamma(k + 2)

    def block(n_max: int) -> np.ndarray:
        g = np.empty(n_max + 1)
        acc = 0
        for j in range(n_max + 1):
            acc += (-1) ** j * math.comb(j + k + 1, k + 1)
            g[j] = float(acc)
        nu = np.arange(n_max + 1)
        return np.exp(0.5 * (_gammaln(nu + 1) - _gammaln(nu + k + 3))) * g

    return CoefficientStream(
        basis=GuseinovBasis(k, b, 0, 0),
        prefactor=pref,
        factor_block=block,
        target={"kind": "coulomb"},
        target_function=radial.coulomb(),
        target_norm_sq=math.inf,
        formal=True,
    )


def projected_stream(g: SphericalFunction, k: int, beta: float, nodes: int | None = None) -> CoefficientStream:
    """Coefficients (psi_nu | r^k | g) by quadrature, for functions without a closed form.

    A psi function of the same basis is recognized and given its exact
    Kronecker-delta coefficients.
    """
    basis = GuseinovBasis(k, float(beta), g.ell, g.m)
    rad = g.radial
    if isinstance(rad, GuseinovRadial) and rad.k == k and rad.beta == float(beta) and rad.ell == g.ell:
        j = rad.n - g.ell - 1

        def delta_block(n_max: int) -> np.ndarray:
            out = np.zeros(n_max + 1)
            if j <= n_max:
                out[j] = 1.0
            return out

        return CoefficientStream(basis, 1.0, delta_block, {"kind": "psi", "n": rad.n}, g, 1.0, terminates_at=j)

    def block(n_max: int) -> np.ndarray:
        return _project_block(g, basis, n_max, nodes or max(64, n_max + 32))

    norm, member, _ = radial.norm_and_membership(g, k)
    return CoefficientStream(basis, 1.0, block, {"kind": "projected"}, g, norm, formal=not member)


def _project_block(g: SphericalFunction, basis: GuseinovBasis, n_max: int, nodes: int) -> np.ndarray:
    """All (psi_nu | r^k | g), nu <= n_max, from one generalized Gauss-Laguerre rule.

    The rule weight r^a e^{-c r} absorbs the powers at the origin and the
    combined decay, the remaining factor is a polynomial times the shifted g.
    """
    rad = g.radial
    pg, gg = float(rad.min_power), float(rad.min_decay)
    a = basis.ell + pg + basis.k + 2
    c = basis.beta + gg
    if not (a > -1 and c > 0):
        raise DomainError("projection integrand is not integrable")
    x, logw = radial.genlaguerre_log_rule(nodes, a)
    r = x / c
    # psi already carries r^ell e^{-beta r}, so those are divided out of the weights
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        gv = rad(r, decay_shift=gg, power_shift=pg)
        logw = logw + np.log(np.abs(gv)) - basis.ell * np.log(r) + basis.beta * r
    logw[~np.isfinite(logw)] = -np.inf
    mom = psi_moments(n_max, basis.ell, basis.k, basis.beta, r, weights=np.sign(gv), log_weights=logw)
    return mom * c ** -(a + 1)


# --- truncated expansions -----------------------------------------------------


def evaluate_truncated(t: TruncatedExpansion, point) -> float:
    """sum_{nu<=order} c_nu basis_nu(point), compensated summation.

    For Guseinov bases ``point`` is a radius and the common angular factor is
    left out (the result is the radial factor).
    """
    c = t.stream.coeffs(t.order)
    vals = t.stream.basis.values(t.order, [float(point)])[:, 0]
    return math.fsum((c * vals).tolist())


def mean_square_deviation(target: SphericalFunction | None, t: TruncatedExpansion, k: int | None = None,
                          tolerance: float = 1e-10) -> float:
    """||f - f_N||^2 = ||f||^2 - sum_{nu<=N} |c_nu|^2 (Parseval-reduced form)."""
    stream = t.stream
    if target is not None:
        kk = stream.basis.k if k is None else k
        norm, member, reason = radial.norm_and_membership(target, kk)
    else:
        norm = stream.target_norm_sq
        member = norm is not None and math.isfinite(norm)
        reason = "target outside the space"
    if not member:
        raise DivergentTargetError(f"mean-square deviation undefined: {reason}")
    mass = math.fsum(stream.weighted_sq(t.order).tolist())
    msd = float(norm) - mass
    if msd < 0:
        if msd < -tolerance * max(1.0, float(norm)):
            log.warning("mean-square deviation numerically negative (%g); clamped to 0", msd)
        msd = 0.0
    return msd


def stream_to_csv(stream: CoefficientStream, n_max: int, out=None) -> str:
    """CSV with columns nu, coeff, coeff_sq, parseval_sum."""
    c = stream.coeffs(n_max)
    sq = stream.weighted_sq(n_max)
    running = np.cumsum(sq)
    buf = out if out is not None else io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["nu", "coeff", "coeff_sq", "parseval_sum"])
    for nu in range(n_max + 1):
        writer.writerow([nu, repr(float(c[nu])), repr(float(sq[nu])), repr(float(running[nu]))])
    return buf.getvalue() if out is None else ""
