"""Guseinov's orthonormal functions psi_{n,l}^m(beta, r) in L^2_{r^k}(R^3) and
Slater-type functions chi_{N,L}^M(beta, r).

    psi = [(2b)^{k+3} (n-l-1)! / (n+l+k+1)!]^{1/2} e^{-b r} L_{n-l-1}^{(2l+k+2)}(2 b r) Ysolid_l^m(2 b r)
    chi = (b r)^{N-L-1} e^{-b r} Ysolid_L^M(b r)

Complex versus real harmonics does not matter here: every integral in the
package is diagonal in (l, m), so ``m`` only labels an angular channel.
"""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from . import radial
from .errors import DomainError
from .radial import ExpPolyRadial, SphericalFunction
from .specfun import laguerre_coeffs_exact, laguerre_moments, laguerre_recurrence, laguerre_table, pochhammer


@dataclass(frozen=True)
class GuseinovIndex:
    n: int
    ell: int
    m: int
    k: int
    beta: float

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.ell <= self.n - 1 or abs(self.m) > self.ell:
            raise DomainError(f"invalid Guseinov indices n={self.n}, l={self.ell}, m={self.m}")
        if int(self.k) != self.k or self.k < -1:
            raise DomainError(f"k must be an integer >= -1, got {self.k}")
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")

    @property
    def degree(self) -> int:
        return self.n - self.ell - 1

    @property
    def alpha(self) -> int:
        return 2 * self.ell + self.k + 2


@dataclass(frozen=True)
class StfIndex:
    N: float
    L: int
    M: int
    beta: float

    def __post_init__(self):
        if self.L < 0 or abs(self.M) > self.L:
            raise DomainError(f"invalid STF angular indices L={self.L}, M={self.M}")
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")


def psi_norm_sq(n: int, ell: int, k: int, beta):
    """Square of the normalization constant; exact for rational beta."""
    if isinstance(beta, Rational):
        return Fraction(2 * beta) ** (k + 3) * Fraction(math.factorial(n - ell - 1), math.factorial(n + ell + k + 1))
    return math.exp((k + 3) * math.log(2 * beta) + math.lgamma(n - ell) - math.lgamma(n + ell + k + 2))


def log_psi_norm(n: int, ell: int, k: int, beta: float) -> float:
    return 0.5 * ((k + 3) * math.log(2 * beta) + math.lgamma(n - ell) - math.lgamma(n + ell + k + 2))


def psi_radial(n: int, ell: int, k: int, beta: float, r, decay_shift: float = 0.0, power_shift: float = 0.0):
    """Radial factor of psi (solid-harmonic power included) on an array of radii.

    Uses the Laguerre recurrence, so it stays accurate for large ``n``.
    Returns ``psi_radial(r) * r**(-power_shift) * exp(decay_shift * r)``.
    """
    r = np.asarray(r, dtype=float)
    x = 2.0 * beta * r
    lag = laguerre_recurrence(n - ell - 1, 2 * ell + k + 2, x)
    logpref = log_psi_norm(n, ell, k, beta) + ell * math.log(2 * beta)
    pw = ell - power_shift
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        powpart = np.exp(pw * np.log(r)) if pw != 0 else 1.0
        return math.exp(logpref) * powpart * np.exp(-(beta - decay_shift) * r) * lag


def _psi_row_lognorm(nu_max: int, ell: int, k: int, beta: float) -> np.ndarray:
    lognorm = np.array([log_psi_norm(nu + ell + 1, ell, k, beta) for nu in range(nu_max + 1)])
    return lognorm + ell * math.log(2 * beta)


def psi_table(nu_max: int, ell: int, k: int, beta: float, r, with_power: bool = True) -> np.ndarray:
    """Radial factors of psi_{nu+ell+1, ell} for nu = 0..nu_max, shape (nu_max+1, len(r)).

    The exponential rides through the recurrence as a log scale, so large
    degrees at large radii neither overflow nor underflow spuriously.
    ``with_power=False`` leaves out the solid-harmonic factor r**ell.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    x = 2.0 * beta * r
    lag = laguerre_table(nu_max, 2 * ell + k + 2, x, log_scale=-0.5 * x)
    out = np.exp(_psi_row_lognorm(nu_max, ell, k, beta))[:, None] * lag
    if with_power and ell:
        out *= (r ** ell)[None, :]
    return out


def psi_moments(nu_max: int, ell: int, k: int, beta: float, r, weights=None, log_weights=None) -> np.ndarray:
    """sum_i w_i psi_nu(r_i) for nu = 0..nu_max (radial factors incl. r**ell).

    Weights may be given directly (any sign) or as logarithms (positive
    weights), the latter for quadrature rules whose weights underflow.
    """
    r = np.atleast_1d(np.asarray(r, dtype=float))
    x = 2.0 * beta * r
    with np.errstate(divide="ignore"):
        logc = -0.5 * x + (ell * np.log(r) if ell else 0.0)
        sign = None
        if weights is not None:
            w = np.asarray(weights, dtype=float)
            logc = logc + np.log(np.abs(w))
            sign = np.sign(w)
        if log_weights is not None:
            logc = logc + np.asarray(log_weights, dtype=float)
    mom = laguerre_moments(nu_max, 2 * ell + k + 2, x, logc, sign)
    return np.exp(_psi_row_lognorm(nu_max, ell, k, beta)) * mom


@dataclass(frozen=True)
class GuseinovRadial(ExpPolyRadial):
    """ExpPolyRadial of a psi function that evaluates through the recurrence."""

    n: int = 1
    ell: int = 0
    k: int = 0
    beta: float = 1.0

    def __call__(self, r, decay_shift: float = 0.0, power_shift: float = 0.0):
        return psi_radial(self.n, self.ell, self.k, float(self.beta), r, decay_shift, power_shift)


def _unnormalized_terms(idx: GuseinovIndex) -> tuple:
    """Terms of e^{-b r} L(2 b r) (2 b r)^l with exact coefficients when beta is rational."""
    two_b = 2 * (Fraction(idx.beta) if isinstance(idx.beta, Rational) else idx.beta)
    coeffs = laguerre_coeffs_exact(idx.degree, idx.alpha)
    terms = []
    fact = 1
    for j, c in enumerate(coeffs):
        if j:
            fact *= j
        coeff = c / fact * two_b ** (idx.ell + j)
        if not isinstance(two_b, Fraction):
            coeff = float(coeff)
        terms.append((coeff, idx.ell + j, idx.beta))
    return tuple(terms)


def psi_build_unnormalized(idx: GuseinovIndex) -> tuple[SphericalFunction, object]:
    """psi without its normalization constant, plus the constant squared.

    For rational beta both parts are exact rationals, which is what the
    exact orthonormality check works with.
    """
    fn = SphericalFunction(ExpPolyRadial(_unnormalized_terms(idx)), idx.ell, idx.m)
    return fn, psi_norm_sq(idx.n, idx.ell, idx.k, idx.beta)


def psi_build(idx: GuseinovIndex) -> SphericalFunction:
    norm = math.sqrt(float(psi_norm_sq(idx.n, idx.ell, idx.k, idx.beta)))
    terms = tuple((norm * float(c), p, float(g)) for c, p, g in _unnormalized_terms(idx))
    rad = GuseinovRadial(terms, n=idx.n, ell=idx.ell, k=idx.k, beta=float(idx.beta))
    return SphericalFunction(rad, idx.ell, idx.m)


def stf_build(idx: StfIndex) -> SphericalFunction:
    """chi_{N,L}^M(beta, r) = beta^{N-1} r^{N-1} e^{-beta r} Y_L^M."""
    N, beta = idx.N, idx.beta
    if isinstance(N, Rational) and isinstance(beta, Rational) and int(N) == N:
        coeff = Fraction(beta) ** (int(N) - 1)
        power = int(N) - 1
    else:
        coeff = float(beta) ** (float(N) - 1)
        power = float(N) - 1
    return SphericalFunction(ExpPolyRadial.single(coeff, power, beta), idx.L, idx.M)


def yukawa_as_stf(beta) -> tuple[float, StfIndex]:
    """exp(-beta r)/r = sqrt(4 pi) * beta * chi_{0,0}^0(beta, r)."""
    return radial.SQRT_4PI * beta, StfIndex(0, 0, 0, beta)


def guseinov_indices(n_max: int, k: int, beta, ell_max: int | None = None) -> list[GuseinovIndex]:
    out = []
    for n in range(1, n_max + 1):
        for ell in range(0, n):
            if ell_max is not None and ell > ell_max:
                continue
            for m in range(-ell, ell + 1):
                out.append(GuseinovIndex(n, ell, m, k, beta))
    return out


def _exact_sqrt(q: Fraction) -> Fraction:
    num, den = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if num * num != q.numerator or den * den != q.denominator:
        raise ValueError(f"{q} is not the square of a rational")
    return Fraction(num, den)


def gram_exact(k: int, beta, n_max: int) -> dict:
    """Exact Gram entries {(idx_a, idx_b): Fraction} for same-channel pairs.

    Entries whose square is not a rational square raise; for an orthonormal
    set every entry is exactly 0 or 1.  Cross-channel pairs vanish by angular
    orthogonality and are omitted.
    """
    beta = Fraction(beta)
    cache = {}
    for ell in range(n_max):
        for n in range(ell + 1, n_max + 1):
            cache[(n, ell)] = psi_build_unnormalized(GuseinovIndex(n, ell, 0, k, beta))
    out = {}
    for ell in range(n_max):
        ns = range(ell + 1, n_max + 1)
        for a in ns:
            fa, na = cache[(a, ell)]
            for b in ns:
                fb, nb = cache[(b, ell)]
                u = radial.inner_product(fa, fb, k)
                if u == 0:
                    val = Fraction(0)
                else:
                    val = _exact_sqrt(na * nb * u * u) * (1 if u > 0 else -1)
                for m in range(-ell, ell + 1):
                    out[(GuseinovIndex(a, ell, m, k, beta), GuseinovIndex(b, ell, m, k, beta))] = val
    return out


def gram_quadrature(k: int, beta: float, n_max: int, nodes: int = radial.DEFAULT_NODES) -> tuple[list, np.ndarray]:
    """Gram matrix over all (n, l, m) with n <= n_max by Gauss-Laguerre quadrature."""
    idxs = guseinov_indices(n_max, k, beta)
    fns = [psi_build(i) for i in idxs]
    G = np.zeros((len(idxs), len(idxs)))
    radial_cache: dict = {}
    for a, fa in enumerate(fns):
        for b, fb in enumerate(fns):
            if not fa.same_channel(fb):
                continue
            key = (idxs[a].n, idxs[b].n, idxs[a].ell)
            if key not in radial_cache:
                radial_cache[key] = radial.quadrature_inner_product(fa, fb, k, nodes)
            G[a, b] = radial_cache[key]
    return idxs, G


_B_CACHE: dict = {}
_B_LOCK = threading.Lock()


@dataclass(frozen=True)
class ConversionMatrix:
    """psi_{n,l} = sqrt(scale[n]) * sum_j rows[n][j] chi_{j+l+1,l}, exactly.

    ``scale`` holds (2b)^{k+3} (n+l+k+1)!/(n-l-1)!; ``rows`` are rational.
    """

    k: int
    beta: Fraction
    ell: int
    n_max: int
    scale: tuple
    rows: tuple

    def as_float(self) -> np.ndarray:
        size = self.n_max - self.ell
        B = np.zeros((size, size))
        for i, row in enumerate(self.rows):
            s = math.sqrt(float(self.scale[i]))
            for j, q in enumerate(row):
                B[i, j] = s * float(q)
        return B

    def inverse_rows(self) -> list[list[Fraction]]:
        """Exact inverse of the rational triangular part (chi in terms of sqrt-scaled psi)."""
        size = len(self.rows)
        inv = [[Fraction(0)] * size for _ in range(size)]
        for i in range(size):
            inv[i][i] = 1 / self.rows[i][i]
            for j in range(i - 1, -1, -1):
                acc = sum((self.rows[i][t] * inv[t][j] for t in range(j, i)), Fraction(0))
                inv[i][j] = -acc / self.rows[i][i]
        return inv


def conversion_matrix(k: int, beta, ell: int, n_max: int) -> ConversionMatrix:
    """Exact psi -> chi conversion for n = l+1..n_max, cached per (k, beta, l, n_max)."""
    beta = Fraction(beta)
    key = (k, beta, ell, n_max)
    cached = _B_CACHE.get(key)
    if cached is not None:
        return cached
    scales, rows = [], []
    size = n_max - ell
    for n in range(ell + 1, n_max + 1):
        scales.append((2 * beta) ** (k + 3) * Fraction(math.factorial(n + ell + k + 1), math.factorial(n - ell - 1)))
        row = [Fraction(0)] * size
        for nu in range(0, n - ell):
            row[nu] = (
                Fraction(2) ** (ell + nu)
                * pochhammer(-n + ell + 1, nu)
                / (math.factorial(2 * ell + k + nu + 2) * math.factorial(nu))
            )
        rows.append(tuple(row))
    mat = ConversionMatrix(k, beta, ell, n_max, tuple(scales), tuple(rows))
    with _B_LOCK:
        return _B_CACHE.setdefault(key, mat)


def psi_to_stf(idx: GuseinovIndex) -> list[tuple[float, StfIndex]]:
    """psi as a finite combination of chi_{nu+l+1,l}^m(beta, .), nu = 0..n-l-1."""
    n, ell, k, beta = idx.n, idx.ell, idx.k, idx.beta
    logpref = 0.5 * ((k + 3) * math.log(2 * beta) + math.lgamma(n + ell + k + 2) - math.lgamma(n - ell))
    out = []
    for nu in range(0, n - ell):
        q = pochhammer(-n + ell + 1, nu) * 2 ** (ell + nu) / (math.factorial(2 * ell + k + nu + 2) * math.factorial(nu))
        out.append((math.exp(logpref) * float(q), StfIndex(nu + ell + 1, ell, idx.m, beta)))
    return out
