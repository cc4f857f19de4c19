"""Special functions: gamma kernel, Pochhammer symbols, Laguerre polynomials,
terminating Gauss hypergeometric sums.

Two backends live side by side.  Functions taking ``Fraction``/``int``
arguments return exact ``Fraction`` results; functions taking floats return
floats.  Scalar floating evaluations of alternating finite sums widen the
working precision (mpmath) just enough to absorb the cancellation, so the
returned double is accurate to a few ulp.
"""
from __future__ import annotations

import math
from fractions import Fraction
from numbers import Rational

import mpmath
import numpy as np

from .errors import DomainError, PoleError

LOG_FLOAT_MAX = math.log(np.finfo(float).max)


def _is_exact(*values) -> bool:
    return all(isinstance(v, Rational) for v in values)


def log_gamma(x: float) -> float:
    """ln Gamma(x) for x > 0."""
    if not x > 0:
        raise DomainError(f"log_gamma requires x > 0, got {x!r}")
    return math.lgamma(x)


def exp_checked(log_value: float) -> float:
    """exp() that raises instead of saturating to inf."""
    if log_value > LOG_FLOAT_MAX:
        raise OverflowError(f"exp({log_value}) overflows double precision")
    return math.exp(log_value)


def log_factorial(n: int) -> float:
    if n < 0:
        raise DomainError(f"factorial of negative integer {n}")
    return math.lgamma(n + 1)


def pochhammer(a, n: int):
    """Rising factorial (a)_n = a (a+1) ... (a+n-1).

    Exact (``Fraction``) when ``a`` is rational, float otherwise.
    """
    if n < 0:
        raise DomainError(f"pochhammer needs n >= 0, got {n}")
    if _is_exact(a):
        out = Fraction(1)
        a = Fraction(a)
        for j in range(n):
            out *= a + j
        return out
    sign, logabs = log_pochhammer(a, n)
    if sign == 0:
        return 0.0
    return sign * exp_checked(logabs)


def log_pochhammer(a: float, n: int) -> tuple[int, float]:
    """Sign and log-magnitude of (a)_n; sign 0 means the product vanishes."""
    if n < 0:
        raise DomainError(f"pochhammer needs n >= 0, got {n}")
    a = float(a)
    if n == 0:
        return 1, 0.0
    if a <= 0 and a == math.floor(a) and n > -a:
        return 0, -math.inf
    sign = 1
    logabs = 0.0
    j = 0
    # factors a, a+1, ... that are <= 0 are handled explicitly
    while j < n and a + j <= 0:
        f = a + j
        if f < 0:
            sign = -sign
        logabs += math.log(abs(f))
        j += 1
    if j < n:
        logabs += math.lgamma(a + n) - math.lgamma(a + j)
    return sign, logabs


def binomial(x, m: int):
    """Generalized binomial coefficient C(x, m) for integer m >= 0."""
    if m < 0:
        return Fraction(0) if _is_exact(x) else 0.0
    if _is_exact(x):
        x = Fraction(x)
        out = Fraction(1)
        for j in range(m):
            out = out * (x - j) / (j + 1)
        return out
    out = 1.0
    for j in range(m):
        out = out * (x - j) / (j + 1)
    return out


def laguerre_coeffs_exact(n: int, alpha) -> list[Fraction]:
    """Coefficients c_nu with L_n^(alpha)(x) = sum_nu c_nu x^nu / nu!.

    c_nu = (-1)^nu C(n+alpha, n-nu), computed exactly.
    """
    if n < 0:
        raise DomainError(f"degree must be >= 0, got {n}")
    alpha = Fraction(alpha)
    if not alpha > -1:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    return [(-1) ** nu * binomial(n + alpha, n - nu) for nu in range(n + 1)]


def laguerre_eval_exact(n: int, alpha, x) -> Fraction:
    coeffs = laguerre_coeffs_exact(n, alpha)
    x = Fraction(x)
    total = Fraction(0)
    power = Fraction(1)
    fact = 1
    for nu, c in enumerate(coeffs):
        if nu:
            power *= x
            fact *= nu
        total += c * power / fact
    return total


def _working_dps(max_log10_term: float) -> int:
    return int(25 + max(0.0, max_log10_term))


def laguerre_eval(n: int, alpha, x):
    """L_n^(alpha)(x) by the explicit finite sum.

    Rational ``alpha`` and ``x`` give an exact ``Fraction``.  Otherwise the
    sum is accumulated at a working precision widened by the size of its
    largest term and rounded to a float once.
    """
    if n < 0:
        raise DomainError(f"degree must be >= 0, got {n}")
    if not alpha > -1:
        raise DomainError(f"alpha must exceed -1, got {alpha}")
    if _is_exact(alpha, x):
        return laguerre_eval_exact(n, alpha, x)
    alpha = float(alpha)
    x = float(x)
    # crude bound on the largest term, only used to size the precision
    logmax = math.lgamma(n + abs(alpha) + 2) + n * math.log1p(abs(x))
    with mpmath.workdps(_working_dps(logmax / math.log(10))):
        a = mpmath.mpf(alpha)
        xm = mpmath.mpf(x)
        term = mpmath.binomial(n + a, n)
        total = term
        for nu in range(1, n + 1):
            # C(n+a, n-nu) / C(n+a, n-nu+1) = (n-nu+1) / (a+nu)
            term = -term * (n - nu + 1) / (a + nu) * xm / nu
            total += term
        return float(total)


def laguerre_recurrence(n: int, alpha: float, x) -> np.ndarray:
    """L_n^(alpha) on an array by the forward three-term recurrence."""
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if n == 0:
        return prev
    cur = 1.0 + alpha - x
    for j in range(1, n):
        prev, cur = cur, ((2 * j + alpha + 1 - x) * cur - (j + alpha) * prev) / (j + 1)
    return cur


def laguerre_table(n_max: int, alpha: float, x, scale=None, log_scale=None) -> np.ndarray:
    """Rows L_0..L_{n_max} evaluated on ``x`` (shape (n_max+1, len(x))).

    ``scale`` (or ``log_scale``, its logarithm) multiplies every row.  The
    recurrence runs on rescaled columns with a tracked log offset, so
    e.g. log_scale = -x/2 yields the bounded e^{-x/2} L_n(x) even where
    e^{-x/2} alone would underflow.
    """
    x = np.asarray(x, dtype=float)
    if log_scale is None:
        with np.errstate(divide="ignore"):
            log_scale = np.zeros_like(x) if scale is None else np.log(np.abs(scale))
    out = np.empty((n_max + 1,) + x.shape)
    for j, row, off in _laguerre_rows(n_max, alpha, x):
        with np.errstate(over="ignore", under="ignore"):
            out[j] = row * np.exp(off + log_scale)
    if scale is not None:
        out *= np.sign(scale)
    return out


def _laguerre_rows(n_max: int, alpha: float, x: np.ndarray, big: float = 1e150):
    """Yield (j, r_j, o_j) with L_j(x) = r_j * exp(o_j), columns rescaled on the fly."""
    prev = np.ones_like(x)
    off = np.zeros_like(x)
    yield 0, prev, off
    if n_max == 0:
        return
    cur = 1.0 + alpha - x
    yield 1, cur, off
    for j in range(1, n_max):
        prev, cur = cur, ((2 * j + alpha + 1 - x) * cur - (j + alpha) * prev) / (j + 1)
        mag = np.abs(cur)
        hit = mag > big
        if hit.any():
            f = np.where(hit, mag, 1.0)
            prev, cur = prev / f, cur / f
            off = off + np.log(f)
        yield j + 1, cur, off


def laguerre_moments(n_max: int, alpha: float, x, logc, sign=None) -> np.ndarray:
    """m_j = sum_i sign_i exp(logc_i) L_j(x_i) for j = 0..n_max without storing the table."""
    x = np.asarray(x, dtype=float)
    logc = np.asarray(logc, dtype=float)
    sgn = np.ones_like(x) if sign is None else np.asarray(sign, dtype=float)
    out = np.empty(n_max + 1)
    for j, row, off in _laguerre_rows(n_max, alpha, x):
        with np.errstate(over="ignore", under="ignore"):
            out[j] = np.dot(sgn * row, np.exp(off + logc))
    return out


def hyp2f1_terminating(n: int, b, c, z):
    """2F1(-n, b; c; z) as the finite sum over j = 0..n.

    Exact when b, c, z are rational; otherwise accumulated at widened
    precision and rounded once.
    """
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")
    cf = float(c)
    if cf <= 0 and cf == math.floor(cf) and n > -cf:
        raise PoleError(f"(c)_j vanishes at j={int(-cf) + 1} before termination (c={c})")
    if _is_exact(b, c, z):
        b, c, z = Fraction(b), Fraction(c), Fraction(z)
        term = Fraction(1)
        total = Fraction(1)
        for j in range(n):
            term = term * (j - n) * (b + j) * z / ((c + j) * (j + 1))
            total += term
        return total
    b, c, z = float(b), float(c), float(z)
    logt = logmax = 0.0
    for j in range(n):
        if b + j == 0 or z == 0:
            break
        logt += math.log((n - j) * abs(b + j) * abs(z) / (abs(c + j) * (j + 1)))
        logmax = max(logmax, logt)
    with mpmath.workdps(_working_dps(logmax / math.log(10))):
        bm, cm, zm = mpmath.mpf(b), mpmath.mpf(c), mpmath.mpf(z)
        term = mpmath.mpf(1)
        total = mpmath.mpf(1)
        for j in range(n):
            term = term * (j - n) * (bm + j) * zm / ((cm + j) * (j + 1))
            total += term
        return float(total)


def gamma_ratio(z: float, a: float, b: float) -> float:
    """Gamma(z+a)/Gamma(z+b) via log-gamma."""
    return exp_checked(log_gamma(z + a) - log_gamma(z + b))


def gamma_ratio_asymptotic(z: float, a: float, b: float) -> float:
    """Leading term z**(a-b) of Gamma(z+a)/Gamma(z+b) for large z.

    The neglected remainder is O(z**(a-b-1)); its first coefficient is
    (a-b)(a+b-1)/2, so the relative error behaves like (a-b)(a+b-1)/(2z).
    """
    if not (z + a > 0 and z + b > 0):
        raise DomainError("gamma_ratio_asymptotic needs z+a > 0 and z+b > 0")
    return z ** (a - b)
