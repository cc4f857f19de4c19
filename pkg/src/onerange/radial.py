"""Radial carriers and inner products in the weighted spaces L^2_{r^k}(R^3).

A :class:`SphericalFunction` is ``R(r) * Y_l^m(theta, phi)`` where ``Y`` is a
real orthonormal spherical harmonic and ``R`` is an :class:`ExpPolyRadial`,
i.e. a finite sum ``sum_i c_i r**p_i exp(-g_i r)``.  The factor ``r**l`` of
the regular solid harmonic is folded into the radial powers when a function
is built, so for the regular solid harmonic we have
``script-Y_l^m(a r) = a**l r**l Y_l^m``.  With this convention every angular
integral is ``delta_ll' delta_mm'`` and inner products reduce to radial
moments::

    (f | r^k | g) = delta * integral_0^inf R_f(r) R_g(r) r**(k+2) dr

Coefficients may be ``Fraction`` (with integer powers and rational decays),
in which case the closed-form inner product is exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from numbers import Rational
from typing import Iterable

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln, lpmv

from .errors import DivergentIntegralError, DomainError
from .specfun import exp_checked, laguerre_table

SQRT_4PI = math.sqrt(4.0 * math.pi)
DEFAULT_NODES = 200


@dataclass(frozen=True)
class ExpPolyRadial:
    """Finite sum of ``coeff * r**power * exp(-decay * r)`` terms.

    Decay 0 is accepted so that the Coulomb potential is representable; such
    terms can never be square integrable and are flagged by the membership
    test.
    """

    terms: tuple[tuple, ...]

    def __post_init__(self):
        terms = tuple(tuple(t) for t in self.terms)
        if not terms:
            raise DomainError("ExpPolyRadial needs at least one term")
        for c, p, g in terms:
            if g < 0:
                raise DomainError(f"negative decay {g}")
            if not p > -2:
                raise DomainError(f"power {p} must exceed -2")
        object.__setattr__(self, "terms", terms)

    @classmethod
    def single(cls, coeff, power, decay) -> "ExpPolyRadial":
        return cls(((coeff, power, decay),))

    @property
    def min_power(self):
        return min(p for _, p, _ in self.terms)

    @property
    def min_decay(self):
        return min(g for _, _, g in self.terms)

    def __call__(self, r, decay_shift: float = 0.0, power_shift: float = 0.0):
        """Evaluate ``R(r) * r**(-power_shift) * exp(decay_shift * r)``."""
        r = np.asarray(r, dtype=float)
        out = np.zeros_like(r)
        with np.errstate(divide="ignore", invalid="ignore"):
            logr = np.log(r)
        for c, p, g in self.terms:
            pw = float(p) - power_shift
            if pw == 0:
                powpart = 1.0
            else:
                with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                    powpart = np.exp(pw * logr)
            out = out + float(c) * powpart * np.exp(-(float(g) - decay_shift) * r)
        return out

    def scale(self, factor) -> "ExpPolyRadial":
        return ExpPolyRadial(tuple((factor * c, p, g) for c, p, g in self.terms))

    def __add__(self, other: "ExpPolyRadial") -> "ExpPolyRadial":
        return ExpPolyRadial(self.terms + other.terms).simplified()

    def __mul__(self, other: "ExpPolyRadial") -> "ExpPolyRadial":
        return ExpPolyRadial(
            tuple(
                (c1 * c2, p1 + p2, g1 + g2)
                for c1, p1, g1 in self.terms
                for c2, p2, g2 in other.terms
            )
        ).simplified()

    def simplified(self) -> "ExpPolyRadial":
        merged: dict = {}
        for c, p, g in self.terms:
            merged[(p, g)] = merged.get((p, g), 0) + c
        terms = tuple((c, p, g) for (p, g), c in merged.items() if c != 0)
        if not terms:
            # keep a single explicit zero term; nonempty invariant
            c, p, g = self.terms[0]
            terms = ((0 * c, p, g),)
        return ExpPolyRadial(terms)


@dataclass(frozen=True)
class SphericalFunction:
    """``radial(r) * Y_ell^m`` with the solid-harmonic ``r**ell`` inside radial."""

    radial: ExpPolyRadial
    ell: int = 0
    m: int = 0

    def __post_init__(self):
        if self.ell < 0 or abs(self.m) > self.ell:
            raise DomainError(f"invalid angular indices ({self.ell}, {self.m})")

    def same_channel(self, other: "SphericalFunction") -> bool:
        return self.ell == other.ell and self.m == other.m

    def scale(self, factor) -> "SphericalFunction":
        return SphericalFunction(self.radial.scale(factor), self.ell, self.m)

    def __add__(self, other: "SphericalFunction") -> "SphericalFunction":
        if not self.same_channel(other):
            raise DomainError("cannot add functions from different angular channels")
        return SphericalFunction(self.radial + other.radial, self.ell, self.m)

    def __sub__(self, other: "SphericalFunction") -> "SphericalFunction":
        return self + other.scale(-1)


@dataclass(frozen=True)
class WeightedSpace:
    """L^2_{r^k}(R^3) for k = -1, 0, 1, 2, ..."""

    k: int = 0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < -1:
            raise DomainError(f"weight exponent k must be an integer >= -1, got {self.k}")


def _space(space) -> WeightedSpace:
    return space if isinstance(space, WeightedSpace) else WeightedSpace(space)


def yukawa(beta) -> SphericalFunction:
    """exp(-beta r)/r as an s-function."""
    return SphericalFunction(ExpPolyRadial.single(SQRT_4PI, -1, beta))


def coulomb() -> SphericalFunction:
    """1/r as an s-function (no exponential decay)."""
    return SphericalFunction(ExpPolyRadial.single(SQRT_4PI, -1, 0))


def s_function(coeff, power, decay) -> SphericalFunction:
    """The spherically symmetric ``coeff * r**power * exp(-decay r)`` in R^3."""
    return SphericalFunction(ExpPolyRadial.single(SQRT_4PI * coeff, power, decay))


def radial_moment(p, gamma):
    """integral_0^inf r**p exp(-gamma r) dr = Gamma(p+1)/gamma**(p+1).

    Exact ``Fraction`` for integer ``p`` and rational ``gamma``.
    """
    if not p > -1:
        raise DivergentIntegralError(f"r^{p} is not integrable at the origin")
    if not gamma > 0:
        raise DivergentIntegralError(f"no exponential decay (gamma={gamma}); integral diverges at infinity")
    if isinstance(gamma, Rational) and isinstance(p, int):
        return Fraction(math.factorial(p)) / Fraction(gamma) ** (p + 1)
    return exp_checked(math.lgamma(p + 1) - (p + 1) * math.log(gamma))


def _pair_terms(f: SphericalFunction, g: SphericalFunction, k: int):
    for c1, p1, g1 in f.radial.terms:
        for c2, p2, g2 in g.radial.terms:
            yield c1 * c2, p1 + p2 + k + 2, g1 + g2


def _sum(values: list):
    if all(isinstance(v, Rational) for v in values):
        return sum(values, Fraction(0))
    return math.fsum(float(v) for v in values)


def inner_product(f: SphericalFunction, g: SphericalFunction, space=0):
    """Closed-form (f | r^k | g) over R^3; zero across angular channels."""
    k = _space(space).k
    if not f.same_channel(g):
        return 0.0
    parts = []
    for c, p, gam in _pair_terms(f, g, k):
        if c == 0:
            continue
        parts.append(c * radial_moment(p, gam))
    if not parts:
        return 0.0
    return _sum(parts)


def membership(f: SphericalFunction, space=0) -> tuple[bool, str]:
    """Term-wise square-integrability test (cancellations are not detected)."""
    k = _space(space).k
    active = [(c, p, g) for c, p, g in f.radial.terms if c != 0]
    if not active:
        return True, ""
    pmin = min(p for _, p, _ in active)
    combined = 2 * pmin + k + 2
    if not combined > -1:
        return False, f"power {_fmt_power(combined)} at origin"
    if min(g for _, _, g in active) <= 0:
        return False, "no exponential decay at infinity"
    return True, ""


def _fmt_power(p) -> str:
    p = float(p)
    return str(int(p)) if p == int(p) else repr(p)


def norm_and_membership(f: SphericalFunction, space=0):
    """Return (norm squared or +inf, member flag, reason for non-membership)."""
    member, reason = membership(f, space)
    if not member:
        return math.inf, False, reason
    return inner_product(f, f, space), True, ""


@lru_cache(maxsize=64)
def genlaguerre_log_rule(n: int, alpha: float):
    """Nodes and log-weights of the Gauss rule for x^alpha e^{-x}.

    Nodes are eigenvalues of the Jacobi matrix, polished by Newton steps.
    Weights use w = Gamma(n+a+1) / (n! x L_n'(x)^2) with
    L_n^(a)' = -L_{n-1}^(a+1), evaluated as e^{-x/2} L so that hundreds of
    nodes cause no overflow.  The derivative peaks near the roots of L_n,
    which keeps the small weights accurate; L_{n+1} would not, since its
    roots nearly coincide with those of L_n at the ends of the spectrum.
    """
    j = np.arange(n, dtype=float)
    x = eigh_tridiagonal(2 * j + alpha + 1, np.sqrt(j[1:] * (j[1:] + alpha)), eigvals_only=True)
    for _ in range(2):
        val = laguerre_table(n, alpha, x, log_scale=-0.5 * x)[n]
        der = laguerre_table(n - 1, alpha + 1, x, log_scale=-0.5 * x)[n - 1] if n > 1 else np.exp(-0.5 * x)
        with np.errstate(divide="ignore", invalid="ignore"):
            step = val / der
        x = np.where(np.isfinite(step), x + step, x)
    der = laguerre_table(n - 1, alpha + 1, x, log_scale=-0.5 * x)[n - 1] if n > 1 else np.exp(-0.5 * x)
    with np.errstate(divide="ignore"):
        logw = gammaln(n + alpha + 1) - gammaln(n + 1) - np.log(x) - 2 * np.log(np.abs(der)) - x
    logw[der == 0] = -np.inf
    return x, logw


def _genlaguerre_rule(n: int, alpha: float):
    x, logw = genlaguerre_log_rule(n, alpha)
    return x, np.exp(logw)


def quadrature_inner_product(f: SphericalFunction, g: SphericalFunction, space=0, nodes: int = DEFAULT_NODES) -> float:
    """Gauss-Laguerre estimate of (f | r^k | g), independent of the moment formula.

    The rule carries the weight ``r**a exp(-c r)`` with ``a`` the smallest
    power of the integrand and ``c`` its slowest decay, so integrands of the
    ``r^p e^{-cr}`` shape are integrated essentially exactly.
    """
    k = _space(space).k
    if not f.same_channel(g):
        return 0.0
    for c, p, gam in _pair_terms(f, g, k):
        if c != 0 and not (p > -1 and gam > 0):
            raise DivergentIntegralError("integrand is not integrable")
    af, ag = float(f.radial.min_power), float(g.radial.min_power)
    gf, gg = float(f.radial.min_decay), float(g.radial.min_decay)
    alpha = af + ag + k + 2
    scale = gf + gg
    x, w = _genlaguerre_rule(nodes, alpha)
    r = x / scale
    vals = f.radial(r, decay_shift=gf, power_shift=af) * g.radial(r, decay_shift=gg, power_shift=ag)
    return float(np.dot(w, vals)) * math.exp(-(alpha + 1) * math.log(scale))


def theta_lm(ell: int, m: int, u):
    """Polar factor of the real harmonic, normalized so int_{-1}^{1} theta^2 du = 1."""
    am = abs(m)
    norm = math.sqrt((2 * ell + 1) / 2.0 * math.exp(gammaln(ell - am + 1) - gammaln(ell + am + 1)))
    return norm * lpmv(am, ell, np.asarray(u, dtype=float))


def phi_m(m: int, phi):
    """Azimuthal factor of the real harmonic, orthonormal on [0, 2 pi)."""
    phi = np.asarray(phi, dtype=float)
    if m == 0:
        return np.full_like(phi, 1.0 / math.sqrt(2 * math.pi))
    if m > 0:
        return np.cos(m * phi) / math.sqrt(math.pi)
    return np.sin(-m * phi) / math.sqrt(math.pi)


def real_harmonic(ell: int, m: int, u, phi):
    return theta_lm(ell, m, u) * phi_m(m, phi)


def combine(functions: Iterable[tuple[float, SphericalFunction]]) -> SphericalFunction:
    """Linear combination of functions sharing one angular channel."""
    out = None
    for c, fn in functions:
        term = fn.scale(c)
        out = term if out is None else out + term
    if out is None:
        raise DomainError("empty combination")
    return out
