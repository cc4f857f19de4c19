"""Two-center expansion coefficients of f(r -+ r') in a Guseinov basis.

The second center sits on the z-axis at distance d, so every coefficient is
a two-dimensional integral over (r, cos theta) and the azimuthal channel m
of the basis must equal the channel M of the target.  For fixed r the polar
variable is replaced by the distance s = |r -+ d z| from the second center,

    du = s ds / (r d),   s in [|r - d|, r + d],

which turns the cusp (STF targets) and the 1/s singularity (Coulomb) into
smooth integrands.  The radial integral is split at r = d: Gauss-Legendre on
[0, d] and a shifted Gauss-Laguerre rule on [d, inf).
"""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.optimize import minimize_scalar

from . import radial
from .errors import AccuracyError, DivergentIntegralError, DomainError
from .expansions import CoefficientStream, GuseinovBasis, projected_stream
from .guseinov import GuseinovIndex, psi_moments, psi_table
from .radial import SphericalFunction, theta_lm


@dataclass(frozen=True)
class QuadraturePolicy:
    radial_nodes: int = 64
    angular_nodes: int = 64
    rtol: float = 1e-8
    atol: float = 1e-12  # relative to the largest coefficient of the field
    refinements: int = 2


@dataclass(frozen=True)
class TwoCenterConfig:
    """f(r - d z) (sign "minus") or f(r + d z) expanded in psi(k, beta)."""

    target: SphericalFunction
    k: int
    beta: float
    displacement: float
    sign: str = "minus"
    label: str = "target"

    def __post_init__(self):
        if not self.displacement >= 0:
            raise DomainError("displacement must be >= 0")
        if self.sign not in ("minus", "plus"):
            raise DomainError("sign must be 'minus' or 'plus'")
        if int(self.k) != self.k or self.k < -1:
            raise DomainError("k must be an integer >= -1")
        if not self.beta > 0:
            raise DomainError("beta must be positive")

    def describe(self) -> dict:
        return {
            "target": self.label,
            "target_channel": [self.target.ell, self.target.m],
            "k": self.k,
            "beta": self.beta,
            "displacement": self.displacement,
            "sign": self.sign,
        }


@dataclass
class CoefficientField:
    """Coefficients C[(n, ell, m)] for one displacement and truncation."""

    values: dict
    n_max: int
    ell_max: int
    config: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "ell", "m", "value"])
        for (n, ell, m), v in sorted(self.values.items()):
            w.writerow([n, ell, m, repr(float(v))])
        return buf.getvalue()

    def parseval_mass(self) -> float:
        return math.fsum(v * v for v in self.values.values())

    def summary(self, **extra) -> dict:
        out = {"truncation": {"n_max": self.n_max, "ell_max": self.ell_max}, "config": self.config,
               "parseval_mass": self.parseval_mass()}
        out.update(extra)
        return out

    def to_json(self, **extra) -> str:
        return json.dumps(self.summary(**extra), sort_keys=True, indent=2)


# --- 2-D quadrature machinery ---------------------------------------------


def _radial_rule(d: float, decay: float, n_nodes: int):
    """Nodes/weights on [0, d] (Legendre) and [d, inf) (Laguerre with weight e^{-decay (r-d)})."""
    xg, wg = leggauss(n_nodes)
    r_in = 0.5 * d * (xg + 1)
    w_in = 0.5 * d * wg
    x, logw = radial.genlaguerre_log_rule(n_nodes, 0.0)
    r_out = d + x / decay
    # the e^{-decay (r-d)} weight is divided back out in log space
    w_out = np.exp(logw + x) / decay
    return np.concatenate([r_in, r_out]), np.concatenate([w_in, w_out])


def _angular_samples(r: np.ndarray, d: float, sign: str, n_nodes: int):
    """For each radius: s-nodes, weights (incl. Jacobian s/(r d)), u and u_v.

    Shapes are (len(r), n_nodes).
    """
    xg, wg = leggauss(n_nodes)
    lo = np.abs(r - d)[:, None]
    hi = (r + d)[:, None]
    s = lo + 0.5 * (hi - lo) * (xg[None, :] + 1)
    ws = 0.5 * (hi - lo) * wg[None, :] * s / (r[:, None] * d)
    rr = r[:, None]
    # minus: v = r - d z, s^2 = r^2 + d^2 - 2 r d u
    u = (rr * rr + d * d - s * s) / (2 * rr * d)
    if sign == "plus":
        u = -u
    u = np.clip(u, -1.0, 1.0)
    vz = rr * u - d if sign == "minus" else rr * u + d
    uv = np.clip(vz / s, -1.0, 1.0)
    return s, ws, u, uv


def _target_values(target: SphericalFunction, s: np.ndarray, uv: np.ndarray) -> np.ndarray:
    """Radial times polar factor of the target at the displaced point (azimuthal factor omitted)."""
    return target.radial(s) * theta_lm(target.ell, target.m, uv)


def _field_once(cfg: TwoCenterConfig, n_max: int, ell_max: int, policy: QuadraturePolicy, scale: int) -> dict:
    d = cfg.displacement
    M = cfg.target.m
    decay = cfg.beta + float(cfg.target.radial.min_decay)
    r, wr = _radial_rule(d, decay, policy.radial_nodes * scale)
    s, ws, u, uv = _angular_samples(r, d, cfg.sign, policy.angular_nodes * scale)
    fvals = _target_values(cfg.target, s, uv)
    out = {}
    for ell in range(abs(M), ell_max + 1):
        if ell + 1 > n_max:
            break
        inner = np.sum(ws * fvals * theta_lm(ell, M, u), axis=1)
        coeffs = psi_moments(n_max - ell - 1, ell, cfg.k, cfg.beta, r, weights=wr * r ** (cfg.k + 2) * inner)
        for nu, c in enumerate(coeffs):
            out[(nu + ell + 1, ell, M)] = float(c)
    return out


def _one_center_field(cfg: TwoCenterConfig, n_max: int, ell_max: int) -> dict:
    t = cfg.target
    out = {}
    for ell in range(abs(t.m), ell_max + 1):
        if ell + 1 > n_max:
            break
        for nu in range(n_max - ell):
            out[(nu + ell + 1, ell, t.m)] = 0.0
    if t.ell <= ell_max and t.ell + 1 <= n_max:
        for c, p, _ in t.radial.terms:
            if c != 0 and not p + t.ell + cfg.k + 2 > -1:
                raise DivergentIntegralError("one-center overlap diverges at the origin")
        stream = projected_stream(t, cfg.k, cfg.beta)
        coeffs = stream.coeffs(n_max - t.ell - 1)
        for nu, c in enumerate(coeffs):
            out[(nu + t.ell + 1, t.ell, t.m)] = float(c)
    return out


def coefficient_field(cfg: TwoCenterConfig, n_max: int, ell_max: int,
                      policy: QuadraturePolicy | None = None) -> CoefficientField:
    """All C_{n,ell}^M with n <= n_max, ell <= ell_max; refined until two passes agree."""
    policy = policy or QuadraturePolicy()
    if cfg.displacement == 0:
        vals = _one_center_field(cfg, n_max, ell_max)
        return CoefficientField(vals, n_max, ell_max, cfg.describe())
    prev = _field_once(cfg, n_max, ell_max, policy, 1)
    for level in range(1, policy.refinements + 1):
        cur = _field_once(cfg, n_max, ell_max, policy, 2 ** level)
        floor = policy.atol * max(1.0, max(abs(v) for v in cur.values()))
        change = {key: abs(cur[key] - prev[key]) for key in cur}
        if all(change[key] <= policy.rtol * abs(cur[key]) + floor for key in cur):
            return CoefficientField(cur, n_max, ell_max, cfg.describe())
        prev = cur
    raise AccuracyError(f"coefficient field did not settle under refinement (max change {max(change.values()):.3g})")


def overlap_coefficient(cfg: TwoCenterConfig, idx: GuseinovIndex, policy: QuadraturePolicy | None = None) -> float:
    """(psi_idx | r^k | f(. -+ r'))."""
    if idx.k != cfg.k or float(idx.beta) != float(cfg.beta):
        raise DomainError("basis index does not match the configuration")
    if idx.m != cfg.target.m:
        return 0.0
    fld = coefficient_field(cfg, idx.n, idx.ell, policy)
    return fld.values[(idx.n, idx.ell, idx.m)]


def addition_series_eval(cfg: TwoCenterConfig, fld: CoefficientField, r: float, u: float) -> float:
    """sum C_{n,ell,M} psi_{n,ell,M}(r, u), azimuthal factor omitted."""
    by_ell: dict = {}
    for (n, ell, m), c in fld.values.items():
        by_ell.setdefault(ell, {})[n] = c
    total = []
    for ell, row in by_ell.items():
        n_top = max(row)
        table = psi_table(n_top - ell - 1, ell, cfg.k, cfg.beta, [r])[:, 0]
        th = float(theta_lm(ell, cfg.target.m, u))
        total.extend(row[n] * table[n - ell - 1] * th for n in row)
    return math.fsum(total)


def target_value(cfg: TwoCenterConfig, r: float, u: float) -> float:
    """f(r -+ d z) at (r, u), azimuthal factor omitted."""
    d = cfg.displacement
    vz = r * u - d if cfg.sign == "minus" else r * u + d
    s = math.sqrt(max(r * r + d * d - 2 * r * d * u * (1 if cfg.sign == "minus" else -1), 0.0))
    uv = vz / s if s > 0 else 1.0
    return float(_target_values(cfg.target, np.array([s]), np.array([uv]))[0])


def displaced_norm_sq(cfg: TwoCenterConfig, policy: QuadraturePolicy | None = None) -> float:
    """integral r^k |f(r -+ d z)|^2 d^3r (translation invariant only for k = 0)."""
    policy = policy or QuadraturePolicy()
    member, reason = radial.membership(cfg.target, 0)
    if not member:
        raise DivergentIntegralError(f"target is not square integrable: {reason}")
    if cfg.displacement == 0 or cfg.k == 0:
        return float(radial.inner_product(cfg.target, cfg.target, cfg.k if cfg.displacement == 0 else 0))
    d = cfg.displacement
    decay = 2 * float(cfg.target.radial.min_decay)
    vals = []
    for scale in (2, 4):
        r, wr = _radial_rule(d, decay, policy.radial_nodes * scale)
        s, ws, u, uv = _angular_samples(r, d, cfg.sign, policy.angular_nodes * scale)
        f = _target_values(cfg.target, s, uv)
        vals.append(float(np.dot(wr * r ** (cfg.k + 2), np.sum(ws * f * f, axis=1))))
    if abs(vals[1] - vals[0]) > 1e-8 * abs(vals[1]):
        raise AccuracyError("displaced norm did not settle")
    return vals[1]


def mse_parseval(cfg: TwoCenterConfig, fld: CoefficientField, norm_sq: float | None = None) -> float:
    """||f||^2 - sum C^2 over the field."""
    if norm_sq is None:
        norm_sq = displaced_norm_sq(cfg)
    return norm_sq - fld.parseval_mass()


def mse_quadrature(cfg: TwoCenterConfig, fld: CoefficientField, policy: QuadraturePolicy | None = None) -> float:
    """Direct quadrature of integral r^k |f - S|^2 d^3r for the truncated series S."""
    policy = policy or QuadraturePolicy()
    d = cfg.displacement
    if d == 0:
        raise DomainError("use mean_square_deviation for the one-center case")
    decay = 2 * min(cfg.beta, float(cfg.target.radial.min_decay))
    r, wr = _radial_rule(d, decay, 2 * policy.radial_nodes)
    s, ws, u, uv = _angular_samples(r, d, cfg.sign, 2 * policy.angular_nodes)
    diff = _target_values(cfg.target, s, uv)
    M = cfg.target.m
    by_ell: dict = {}
    for (n, ell, m), c in fld.values.items():
        by_ell.setdefault(ell, {})[n] = c
    for ell, row in by_ell.items():
        n_top = max(row)
        table = psi_table(n_top - ell - 1, ell, cfg.k, cfg.beta, r)
        coeffs = np.zeros(n_top - ell)
        for n, c in row.items():
            coeffs[n - ell - 1] = c
        radial_sum = coeffs @ table
        diff = diff - radial_sum[:, None] * theta_lm(ell, M, u)
    return float(np.dot(wr * r ** (cfg.k + 2), np.sum(ws * diff * diff, axis=1)))


@dataclass
class LadderStep:
    n_max: int
    ell_max: int
    mse: float
    parseval_mass: float


def mse_ladder(cfg: TwoCenterConfig, orders, policy: QuadraturePolicy | None = None) -> list[LadderStep]:
    """Parseval-reduced MSE for each (n_max, ell_max); the norm comes from quadrature."""
    norm = displaced_norm_sq(cfg, policy)
    steps = []
    for n_max, ell_max in orders:
        fld = coefficient_field(cfg, n_max, ell_max, policy)
        steps.append(LadderStep(n_max, ell_max, norm - fld.parseval_mass(), fld.parseval_mass()))
    return steps


def variational_scale(cfg: TwoCenterConfig, n_max: int, ell_max: int, bounds=(0.25, 4.0),
                      policy: QuadraturePolicy | None = None) -> float:
    """Basis exponent beta minimising the Parseval MSE at truncation (n_max, ell_max).

    Completeness holds for every beta > 0, so the choice only affects how fast
    the ladder converges.  The displaced norm does not depend on beta.
    """
    norm = displaced_norm_sq(cfg, policy)

    def mse(beta):
        sub = TwoCenterConfig(cfg.target, cfg.k, float(beta), cfg.displacement, cfg.sign, cfg.label)
        return norm - coefficient_field(sub, n_max, ell_max, policy).parseval_mass()

    res = minimize_scalar(mse, bounds=bounds, method="bounded", options={"xatol": 1e-4})
    return float(res.x)


def one_center_limit(cfg: TwoCenterConfig, n_max: int, ell_max: int, displacements=(1e-2, 1e-3),
                     policy: QuadraturePolicy | None = None) -> dict:
    """Coefficients extrapolated to d = 0 from two small displacements.

    For a smooth enough target the ell-channel carries only powers d^j with
    j = ell - L mod 2, so channels of the target's parity are extrapolated
    with d^2 (quadratic Richardson) and the others with d^1.
    """
    h1, h2 = (float(h) for h in displacements)
    if not h1 > h2 > 0:
        raise DomainError("need two decreasing positive displacements")
    f1 = coefficient_field(TwoCenterConfig(cfg.target, cfg.k, cfg.beta, h1, cfg.sign, cfg.label), n_max, ell_max, policy)
    f2 = coefficient_field(TwoCenterConfig(cfg.target, cfg.k, cfg.beta, h2, cfg.sign, cfg.label), n_max, ell_max, policy)
    out = {}
    for key, c2 in f2.values.items():
        j = 2 if (key[1] - cfg.target.ell) % 2 == 0 else 1
        out[key] = (c2 * h1 ** j - f1.values[key] * h2 ** j) / (h1 ** j - h2 ** j)
    return out


# --- Coulomb potential --------------------------------------------------------


def coulomb_radial_channel(ell: int, k: int, beta: float, d: float, nu_max: int, nodes: int | None = None,
                           sign: str = "minus") -> np.ndarray:
    """Coefficients of 1/|r -+ d z| on psi_{nu+ell+1, ell, 0}, nu = 0..nu_max.

    Multipole reduction: C = sqrt(4 pi/(2l+1)) int R_psi r^{k+2} r_<^l / r_>^{l+1} dr,
    split at r = d.  Interior: Gauss-Legendre on [0, d].  Exterior: the
    integrand is a polynomial times e^{-beta r}, integrated by a shifted
    Gauss-Laguerre rule that is exact once it has more than nu_max/2 nodes.
    """
    if not d > 0:
        raise DomainError("displacement must be positive")
    n_nodes = nodes or max(64, nu_max // 2 + 48)
    xg, wg = leggauss(n_nodes)
    r_in = 0.5 * d * (xg + 1)
    w_in = 0.5 * d * wg * r_in ** (k + 2 + ell) / d ** (ell + 1)
    x, logw = radial.genlaguerre_log_rule(n_nodes, 0.0)
    r_out = d + x / beta
    # weight e^{-beta (r-d)} divided back out, in log space
    log_out = logw + x - math.log(beta) + ell * math.log(d) + (k + 1 - ell) * np.log(r_out)
    inner = psi_moments(nu_max, ell, k, beta, r_in, weights=w_in)
    outer = psi_moments(nu_max, ell, k, beta, r_out, log_weights=log_out)
    sgn = (-1) ** ell if sign == "plus" else 1
    return sgn * math.sqrt(4 * math.pi / (2 * ell + 1)) * (inner + outer)


def coulomb_coefficient(idx: GuseinovIndex, displacement: float, sign: str = "minus") -> float:
    """(psi_idx | r^k | 1/|r -+ r'|) for r' on the z-axis."""
    if idx.m != 0:
        raise DomainError("on-axis displacement couples only to m = 0")
    nu = idx.n - idx.ell - 1
    return float(coulomb_radial_channel(idx.ell, idx.k, float(idx.beta), displacement, nu, sign=sign)[nu])


def coulomb_field_stream(k: int, beta: float, displacement: float, ell: int = 0) -> CoefficientStream:
    """The ell-channel of the Coulomb coefficient field as a (formal) stream."""

    def block(n_max: int) -> np.ndarray:
        return coulomb_radial_channel(ell, k, beta, displacement, n_max)

    return CoefficientStream(
        basis=GuseinovBasis(k, beta, ell, 0),
        prefactor=1.0,
        factor_block=block,
        target={"kind": "coulomb", "displacement": displacement, "ell": ell},
        target_function=radial.coulomb(),
        target_norm_sq=math.inf,
        formal=True,
    )


def coulomb_field(k: int, beta: float, displacement: float, n_max: int, ell_max: int) -> CoefficientField:
    vals = {}
    for ell in range(0, min(ell_max, n_max - 1) + 1):
        row = coulomb_radial_channel(ell, k, beta, displacement, n_max - ell - 1)
        for nu, c in enumerate(row):
            vals[(nu + ell + 1, ell, 0)] = float(c)
    cfg = {"target": "coulomb", "k": k, "beta": beta, "displacement": displacement}
    return CoefficientField(vals, n_max, ell_max, cfg)


# --- symmetric two-range form --------------------------------------------------


def t_matrix(cfg: TwoCenterConfig, n_max: int, ell_max: int, displacement_nodes: int = 48,
             policy: QuadraturePolicy | None = None) -> dict:
    """T[(n', ell), (n, ell)] for s-type targets, with the same basis on both centers.

    For an s-type target C_{n,l,m}(r') = sqrt(4 pi/(2l+1)) Y_lm(r'/|r'|) C_{n,l,0}(|r'| z),
    so T is diagonal in (l, m) and reduces to one more radial quadrature
    over the displacement:
        T = sqrt(4 pi/(2l+1)) int R_{n'l}(d) d^{k+2} C_{n,l,0}(d) dd.
    """
    if cfg.target.ell != 0:
        raise DomainError("t_matrix is implemented for s-type targets")
    decay = cfg.beta + float(cfg.target.radial.min_decay)
    x, logw = radial.genlaguerre_log_rule(displacement_nodes, cfg.k + 2)
    dd = x / decay
    wd = np.exp(logw + x) / decay ** (cfg.k + 3)
    per_ell = {}
    for d, w in zip(dd, wd):
        sub = TwoCenterConfig(cfg.target, cfg.k, cfg.beta, float(d), cfg.sign, cfg.label)
        fld = coefficient_field(sub, n_max, ell_max, policy)
        for (n, ell, m), c in fld.values.items():
            per_ell.setdefault(ell, []).append((d, w, n, c))
    out = {}
    for ell, rows in per_ell.items():
        ns = sorted({n for _, _, n, _ in rows})
        for n_p in ns:
            for n in ns:
                acc = []
                for d, w, n_c, c in rows:
                    if n_c != n:
                        continue
                    # radial factor of psi'(d) without d^ell: d^{k+2} weight is in the rule
                    rp = psi_table(n_p - ell - 1, ell, cfg.k, cfg.beta, [d], with_power=False)[n_p - ell - 1, 0]
                    acc.append(w * rp * d ** ell * c)
                out[((n_p, ell), (n, ell))] = math.sqrt(4 * math.pi / (2 * ell + 1)) * math.fsum(acc)
    return out
