"""Rearranging Laguerre series into power series.

A finite sum sum_n lambda_n L_n^(a)(x) is a polynomial, and collecting powers
of x gives

    sum_nu (-x)^nu / nu! * sum_{m=0}^{N-nu} (a+nu+1)_m / m! * lambda_{m+nu}.

For an infinite Laguerre series the inner sums become infinite series.  When
the expanded function is not analytic at x = 0 some of them diverge; the
probe below decides this numerically per power index.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gammaln

from .errors import DomainError
from .expansions import CoefficientStream
from .specfun import pochhammer

ANALYTIC = "AnalyticAtOrigin"
NOT_ANALYTIC = "NotAnalyticAtOrigin"


@dataclass(frozen=True)
class Finite:
    value: object

    name = "Finite"


@dataclass(frozen=True)
class DivergentInnerSeries:
    evidence: dict

    name = "DivergentInnerSeries"


@dataclass
class PowerSeriesResult:
    """Coefficients of x^nu with a status per coefficient.

    ``inner`` holds the inner sums, i.e. the coefficients of (-x)^nu / nu!.
    """

    coeffs: list
    statuses: list
    inner: list = field(default_factory=list)


@dataclass
class ProbeReport:
    nu: int
    status: object
    last_terms: list
    ratio_trace: list

    def to_dict(self) -> dict:
        out = {
            "nu": self.nu,
            "status": self.status.name,
            "last_terms": [float(t) for t in self.last_terms],
            "ratio_trace": [float(r) for r in self.ratio_trace],
        }
        if isinstance(self.status, Finite):
            out["value"] = float(self.status.value)
        else:
            out["evidence"] = self.status.evidence
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def rearrange_finite(lam, alpha, N: int | None = None) -> PowerSeriesResult:
    """Exact power series of sum_{n<=N} lambda_n L_n^(alpha)(x)."""
    lam = [Fraction(v) for v in lam]
    if N is None:
        N = len(lam) - 1
    if len(lam) != N + 1:
        raise DomainError(f"need N+1 = {N + 1} coefficients, got {len(lam)}")
    a = Fraction(alpha)
    inner, coeffs = [], []
    for nu in range(N + 1):
        base = a + nu + 1
        total = Fraction(0)
        weight = Fraction(1)
        for m in range(N - nu + 1):
            if m:
                weight = weight * (base + m - 1) / m
            total += weight * lam[m + nu]
        inner.append(total)
        coeffs.append(Fraction((-1) ** nu, math.factorial(nu)) * total)
    return PowerSeriesResult(coeffs, [Finite(c) for c in coeffs], inner)


def polynomial_value(coeffs, x) -> Fraction:
    """Horner evaluation of sum_nu coeffs[nu] x^nu."""
    out = Fraction(0) if isinstance(x, (int, Fraction)) else 0.0
    for c in reversed(coeffs):
        out = out * x + c
    return out


def analyticity_precheck(mu, u=0) -> str:
    """x^mu e^{ux} is analytic at x = 0 exactly when mu is a nonnegative integer."""
    return ANALYTIC if float(mu) == int(float(mu)) and mu >= 0 else NOT_ANALYTIC


def _alpha_of(stream: CoefficientStream) -> float:
    if getattr(stream.basis, "kind", None) != "laguerre":
        raise DomainError("the rearrangement probe needs a Laguerre-basis stream")
    return stream.basis.alpha


def _exact_inner(stream: CoefficientStream, nu: int, alpha) -> Fraction | None:
    """Exact inner sum (prefactor excluded) for terminating streams."""
    if stream.terminates_at is None or stream.reduced_exact is None:
        return None
    base = Fraction(alpha) + nu + 1
    total = Fraction(0)
    for m in range(stream.terminates_at - nu + 1):
        total += pochhammer(base, m) / math.factorial(m) * stream.reduced_exact(m + nu)
    return total


def probe_terms(stream: CoefficientStream, nu: int, m_max: int) -> np.ndarray:
    """t_m = (a+nu+1)_m / m! * lambda_{m+nu} for m = 0..m_max (log-space weights)."""
    alpha = float(_alpha_of(stream))
    lam = stream.coeffs(m_max + nu)[nu:]
    m = np.arange(m_max + 1)
    logw = gammaln(alpha + nu + 1 + m) - gammaln(alpha + nu + 1) - gammaln(m + 1)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        return np.where(lam == 0, 0.0, np.sign(lam) * np.exp(logw + np.log(np.abs(lam))))


def rearrange_infinite_probe(stream: CoefficientStream, nu: int, m_max: int = 4096,
                             margin: float = 0.1) -> ProbeReport:
    """Decide whether the inner series for power index ``nu`` converges.

    Divergence evidence: every ratio |t_{m+1}/t_m| in the final quarter of
    the window is at least 1 - 1/m and no term there vanishes (terms decay
    no faster than the harmonic series).  Otherwise the doubling differences
    of the partial sums must shrink, and the limit is extrapolated from them.
    """
    if nu < 0 or m_max < 16:
        raise DomainError("need nu >= 0 and m_max >= 16")
    alpha = _alpha_of(stream)
    exact = _exact_inner(stream, nu, alpha)
    if exact is not None:
        terms = probe_terms(stream, nu, max(stream.terminates_at - nu, 0))
        value = stream.prefactor * float(exact) if exact else 0.0
        return ProbeReport(nu, Finite(value), terms[-8:].tolist(), [])
    if stream.terminates_at is not None:
        terms = probe_terms(stream, nu, max(stream.terminates_at - nu, 0))
        return ProbeReport(nu, Finite(math.fsum(terms.tolist())), terms[-8:].tolist(), [])

    terms = probe_terms(stream, nu, m_max)
    q0 = (3 * m_max) // 4
    quarter = terms[q0:]
    mm = np.arange(q0, m_max, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratios = np.abs(quarter[1:] / quarter[:-1])
    trace_idx = np.linspace(0, len(ratios) - 1, 16).astype(int)
    trace = ratios[trace_idx].tolist()
    last = terms[-8:].tolist()
    if np.all(quarter != 0) and np.all(np.isfinite(ratios)) and np.all(ratios >= 1 - 1 / mm):
        evidence = {
            "window": [int(q0), int(m_max)],
            "min_ratio_excess": float(np.min(ratios - (1 - 1 / mm))),
            "abs_term_first": float(abs(quarter[0])),
            "abs_term_last": float(abs(quarter[-1])),
        }
        return ProbeReport(nu, DivergentInnerSeries(evidence), last, trace)

    partial = np.cumsum(terms)
    marks = [m_max >> 3, m_max >> 2, m_max >> 1, m_max]
    p = [float(partial[j]) for j in marks]
    d = [p[j + 1] - p[j] for j in range(3)]
    scale = max(1e-300, float(np.max(np.abs(partial))))
    tiny = all(abs(x) <= 1e-15 * scale for x in d[1:])
    shrink = all(d[j] != 0 and abs(d[j + 1]) <= abs(d[j]) * 2.0 ** (-margin) for j in range(2))
    if tiny:
        return ProbeReport(nu, Finite(math.fsum(terms.tolist())), last, trace)
    if shrink:
        r = d[2] / d[1]
        value = p[3] + d[2] * r / (1 - r)
        return ProbeReport(nu, Finite(value), last, trace)
    evidence = {"window": [int(marks[0]), int(m_max)], "doubling_differences": d, "cauchy_failed": True}
    return ProbeReport(nu, DivergentInnerSeries(evidence), last, trace)


def power_series_from_stream(stream: CoefficientStream, nu_max: int, m_max: int = 4096) -> PowerSeriesResult:
    """Probe every power index up to nu_max and collect the x^nu coefficients."""
    coeffs, statuses, inner = [], [], []
    for nu in range(nu_max + 1):
        rep = rearrange_infinite_probe(stream, nu, m_max)
        statuses.append(rep.status)
        if isinstance(rep.status, Finite):
            inner.append(rep.status.value)
            coeffs.append((-1) ** nu / math.factorial(nu) * rep.status.value)
        else:
            inner.append(math.inf)
            coeffs.append(math.nan)
    return PowerSeriesResult(coeffs, statuses, inner)
