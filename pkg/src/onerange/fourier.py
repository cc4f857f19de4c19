"""Momentum-space interaction integrals for spherically symmetric densities.

Symmetric Fourier convention f(p) = (2 pi)^{-3/2} int e^{-i p.r} f(r) d^3r.
For s-type f the transform is sqrt(2/pi)/p int_0^inf r f(r) sin(p r) dr, and
the six-dimensional interaction integrals collapse to

    Y(f, g; beta) = 16 pi^2 int_0^inf f(p) g(p) p^2 / (beta^2 + p^2) dp,
    C(f, g)       = Y(f, g; 0)   (Coulomb),

because the Yukawa kernel e^{-beta r}/r has the transform sqrt(2/pi)/(beta^2 + p^2).
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from numpy.polynomial.legendre import leggauss

from .errors import DivergentIntegralError, DomainError, PoleError

SQRT_2_OVER_PI = math.sqrt(2.0 / math.pi)


def yukawa_ft(p, beta: float):
    """Transform of e^{-beta r}/r."""
    if not beta > 0:
        raise DomainError("beta must be positive")
    p = np.asarray(p, dtype=float)
    return SQRT_2_OVER_PI / (beta * beta + p * p)


def coulomb_ft(p):
    """Transform of 1/r, sqrt(2/pi)/p^2.

    Only meaningful as a generalized function (distribution): 1/r is not in
    L^1 or L^2, and the kernel has a non-integrable-looking pole at p = 0.
    """
    p = np.asarray(p, dtype=float)
    if np.any(p == 0):
        raise PoleError("the Coulomb transform has a pole at p = 0")
    return SQRT_2_OVER_PI / (p * p)


@dataclass(frozen=True)
class InteractionDensity:
    """s-type density with an analytically known transform.

    kinds: "pure_exponential" e^{-a r}, "exp_times_r" r e^{-a r}, and
    "custom" given by its momentum transform and the exponent s of its
    behaviour p^s at the origin.
    """

    kind: str
    a: float = 1.0
    momentum: Callable | None = field(default=None, compare=False)
    origin_exponent: float = 0.0
    label: str = ""

    def __post_init__(self):
        if self.kind not in ("pure_exponential", "exp_times_r", "custom"):
            raise DomainError(f"unsupported density kind {self.kind!r}")
        if self.kind != "custom" and not self.a > 0:
            raise DomainError("decay a must be positive")
        if self.kind == "custom" and self.momentum is None:
            raise DomainError("custom densities need a momentum transform")

    @property
    def scale(self) -> float:
        return self.a if self.kind != "custom" else 1.0

    def coordinate(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "pure_exponential":
            return np.exp(-self.a * r)
        if self.kind == "exp_times_r":
            return r * np.exp(-self.a * r)
        raise DomainError("custom densities are defined in momentum space only")

    def describe(self) -> dict:
        return {"kind": self.kind, "a": self.a, "origin_exponent": self.origin_exponent, "label": self.label}


def pure_exponential(a: float = 1.0) -> InteractionDensity:
    return InteractionDensity("pure_exponential", a)


def exp_times_r(a: float = 1.0) -> InteractionDensity:
    return InteractionDensity("exp_times_r", a)


def slow_decay_witness() -> InteractionDensity:
    """Synthetic density with transform sqrt(2/pi) p^{-1/2}/(1 + p^2).

    Two of them give f g ~ p^{-1} at the origin, so the Coulomb integral
    diverges while every Yukawa integral with beta > 0 is finite.
    """
    return InteractionDensity(
        "custom",
        momentum=lambda p: SQRT_2_OVER_PI * np.asarray(p, dtype=float) ** -0.5 / (1 + np.asarray(p, dtype=float) ** 2),
        origin_exponent=-0.5,
        label="slow-decay witness",
    )


def density_ft(d: InteractionDensity, p):
    p = np.asarray(p, dtype=float)
    a = d.a
    if d.kind == "pure_exponential":
        return SQRT_2_OVER_PI * 2 * a / (a * a + p * p) ** 2
    if d.kind == "exp_times_r":
        return SQRT_2_OVER_PI * (6 * a * a - 2 * p * p) / (a * a + p * p) ** 3
    return d.momentum(p)


# --- momentum quadrature -----------------------------------------------------


@dataclass(frozen=True)
class MomentumRule:
    panel_nodes: int = 32
    tail_nodes: int = 64
    grading: int = 40


def _momentum_nodes(P: float, beta: float, rule: MomentumRule, refine: int = 1):
    """Geometrically graded panels on [0, P] plus a tangent map on [P, inf)."""
    xg, wg = leggauss(rule.panel_nodes * refine)
    lo_edge = P * 2.0 ** -rule.grading
    if beta > 0:
        lo_edge = min(lo_edge, beta * 1e-3)
    edges = [0.0]
    e = lo_edge
    while e < P:
        edges.append(e)
        e *= 2.0
    edges.append(P)
    ps, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        ps.append(0.5 * (b - a) * (xg + 1) + a)
        ws.append(0.5 * (b - a) * wg)
    # tail: p = P (1 + tan theta), theta in [0, pi/2)
    xt, wt = leggauss(rule.tail_nodes * refine)
    theta = 0.25 * math.pi * (xt + 1)
    ps.append(P * (1 + np.tan(theta)))
    ws.append(0.25 * math.pi * wt * P / np.cos(theta) ** 2)
    return np.concatenate(ps), np.concatenate(ws)


def _check_coulomb_integrable(f: InteractionDensity, g: InteractionDensity):
    s = f.origin_exponent + g.origin_exponent
    if not s > -1:
        raise DivergentIntegralError(f"f g ~ p^{s:g} at p = 0: Coulomb integral diverges")


def interaction_integral(f: InteractionDensity, g: InteractionDensity, beta: float,
                         rule: MomentumRule | None = None, with_error: bool = False):
    """Y(f, g; beta) for beta > 0 and C(f, g) for beta = 0."""
    rule = rule or MomentumRule()
    if beta < 0:
        raise DomainError("beta must be >= 0")
    if beta == 0:
        _check_coulomb_integrable(f, g)
    P = 8.0 * max(f.scale, g.scale)
    vals = []
    for refine in (1, 2):
        p, w = _momentum_nodes(P, beta, rule, refine)
        kern = p * p / (beta * beta + p * p)
        vals.append(16 * math.pi ** 2 * float(np.dot(w, density_ft(f, p) * density_ft(g, p) * kern)))
    if with_error:
        return vals[1], abs(vals[1] - vals[0])
    return vals[1]


def momentum_norm_sq(f: InteractionDensity, rule: MomentumRule | None = None) -> float:
    """||f||^2 = 4 pi int f(p)^2 p^2 dp."""
    rule = rule or MomentumRule()
    p, w = _momentum_nodes(8.0 * f.scale, 1.0, rule, 2)
    return 4 * math.pi * float(np.dot(w, density_ft(f, p) ** 2 * p * p))


def coordinate_inner_product(f: InteractionDensity, g: InteractionDensity) -> float:
    """4 pi int f(r) g(r) r^2 dr in closed form (e^{-ar} and r e^{-ar} only)."""
    power = {"pure_exponential": 0, "exp_times_r": 1}
    if f.kind not in power or g.kind not in power:
        raise DomainError("coordinate form unavailable for custom densities")
    n = power[f.kind] + power[g.kind] + 2
    return 4 * math.pi * math.factorial(n) / (f.a + g.a) ** (n + 1)


def plancherel_check(f: InteractionDensity, g: InteractionDensity, rule: MomentumRule | None = None) -> dict:
    rule = rule or MomentumRule()
    p, w = _momentum_nodes(8.0 * max(f.scale, g.scale), 1.0, rule, 2)
    mom = 4 * math.pi * float(np.dot(w, density_ft(f, p) * density_ft(g, p) * p * p))
    coord = coordinate_inner_product(f, g)
    return {"coordinate": coord, "momentum": mom, "relative_difference": abs(mom - coord) / abs(coord)}


@dataclass
class BetaLimitStudy:
    rows: list
    coulomb: float | None
    verdict: str
    extrapolated_limit: float | None
    details: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["beta", "value", "error_estimate"])
        for beta, val, err in self.rows:
            w.writerow([repr(float(beta)), repr(float(val)), repr(float(err))])
        if self.coulomb is not None:
            w.writerow(["0.0", repr(float(self.coulomb)), ""])
        return buf.getvalue()


def beta_limit_study(f: InteractionDensity, g: InteractionDensity, betas, tolerance: float = 1e-6,
                     rule: MomentumRule | None = None) -> BetaLimitStudy:
    """Y(beta) along a decreasing sequence, compared with C when it exists.

    C - Y(beta) = A beta + B beta^2 + ... (the momentum integrand is even in
    p), so the limit is estimated by polynomial extrapolation through the
    last three positive betas (two when only two are given).
    """
    betas = [float(b) for b in betas]
    if any(b2 >= b1 for b1, b2 in zip(betas, betas[1:])) or min(betas) < 0:
        raise DomainError("beta sequence must be strictly decreasing and >= 0")
    positive = [b for b in betas if b > 0]
    rows = []
    for b in positive:
        val, err = interaction_integral(f, g, b, rule, with_error=True)
        rows.append((b, val, err))
    try:
        coul = interaction_integral(f, g, 0.0, rule)
    except DivergentIntegralError as exc:
        growth = [r[1] for r in rows]
        return BetaLimitStudy(rows, None, "divergent", None,
                              {"reason": str(exc), "increasing": all(b >= a for a, b in zip(growth, growth[1:]))})
    extrap = None
    if len(rows) >= 2:
        tail = rows[-3:]
        bs = np.array([r[0] for r in tail])
        vs = np.array([r[1] for r in tail])
        V = np.vander(bs, len(tail), increasing=True)
        extrap = float(np.linalg.solve(V, vs)[0])
    ref = extrap if extrap is not None else rows[-1][1]
    rel = abs(ref - coul) / abs(coul)
    verdict = "continuous" if rel <= tolerance else "discontinuous"
    return BetaLimitStudy(rows, coul, verdict, extrap, {"relative_gap": rel,
                                                          "last_gap": abs(rows[-1][1] - coul) if rows else None})
