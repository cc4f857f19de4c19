"""Convergence diagnostics for coefficient streams.

Parseval partial sums, power-law decay fits, the three-way verdict
(convergent in the mean, divergent in the mean, inconclusive), weak inner
products of a formal expansion against a member function, and the
admissibility test for such products.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from . import radial
from .errors import DomainError, WindowError
from .expansions import CoefficientStream, projected_stream
from .radial import SphericalFunction

CONVERGENT = "ConvergentInMean"
DIVERGENT = "DivergentInMean"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class ClassifyPolicy:
    start: int = 32
    doublings: int = 8
    tolerance: float = 1e-8
    margin: float = 0.1

    def __post_init__(self):
        if self.start < 16 or self.doublings < 3:
            raise DomainError("policy needs start >= 16 and at least 3 doublings")

    @property
    def n_max(self) -> int:
        return self.start << self.doublings


@dataclass(frozen=True)
class DecayFit:
    exponent: float
    log_amplitude: float
    window: tuple[int, int]
    residual: float


@dataclass
class ConvergenceVerdict:
    kind: str
    parseval_estimate: float | None = None
    growth_law: str | None = None
    fit: DecayFit | None = None
    evidence: dict = field(default_factory=dict)

    def report(self, norm_target: float | None = None, audit_notes=None) -> dict:
        """JSON-ready summary; non-finite numbers become strings."""
        return _jsonable({
            "kind": self.kind,
            "exponent": None if self.fit is None else self.fit.exponent,
            "window": None if self.fit is None else list(self.fit.window),
            "parseval_estimate": self.parseval_estimate,
            "growth_law": self.growth_law,
            "norm_target": norm_target,
            "audit_notes": audit_notes or [],
            "evidence": self.evidence,
        })

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.report(**kwargs), sort_keys=True, indent=2)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else str(x)
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def parseval_partial_sums(stream: CoefficientStream, n_max: int) -> np.ndarray:
    """S_N = sum_{nu<=N} |c_nu|^2 h_nu for N = 0..n_max."""
    return np.cumsum(stream.weighted_sq(n_max))


def decay_exponent(stream: CoefficientStream, window: tuple[int, int]) -> DecayFit:
    """Least-squares fit |c_nu|^2 h_nu ~ A nu^e on lo <= nu <= hi."""
    lo, hi = int(window[0]), int(window[1])
    if lo < 1 or hi - lo + 1 < 16:
        raise WindowError(f"window {window} must start at >= 1 and hold at least 16 indices")
    sq = stream.weighted_sq(hi)[lo:]
    if np.any(sq == 0) or not np.all(np.isfinite(sq)):
        raise WindowError(f"window {window} contains zero or non-finite coefficients")
    x = np.log(np.arange(lo, hi + 1, dtype=float))
    y = np.log(sq)
    e, loga = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (e * x + loga)) ** 2)))
    return DecayFit(float(e), float(loga), (lo, hi), resid)


def _fit_nonzero(sq: np.ndarray, lo: int) -> DecayFit | None:
    nu = np.arange(lo, lo + len(sq))
    keep = (sq > 0) & np.isfinite(sq)
    if keep.sum() < 16:
        return None
    x, y = np.log(nu[keep].astype(float)), np.log(sq[keep])
    e, loga = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (e * x + loga)) ** 2)))
    return DecayFit(float(e), float(loga), (int(lo), int(nu[-1])), resid)


def _continue_doublings(s_prev: float, s_last: float, ratio: float) -> float:
    """Limit of the sums when later doubling increments keep shrinking by ``ratio``."""
    return s_last + (s_last - s_prev) * ratio / (1 - ratio)


def classify(stream: CoefficientStream, policy: ClassifyPolicy | None = None) -> ConvergenceVerdict:
    """Verdict from doubling differences of the Parseval sums and a decay fit.

    Convergent: fitted exponent below -1 - margin and the doubling increments
    shrink geometrically (each ratio <= 2^-margin), so the remainder after
    N_max is bounded by a convergent geometric series (the tested Cauchy
    criterion).  Divergent: exponent >= -1 + margin, or exponent >= -1 -
    margin with increments that fail to shrink (harmonic-type growth).
    """
    policy = policy or ClassifyPolicy()
    evidence: dict = {"policy": asdict(policy), "formal": stream.formal}
    if stream.terminates_at is not None:
        total = float(parseval_partial_sums(stream, stream.terminates_at)[-1])
        evidence.update(terminating=True, terminates_at=stream.terminates_at, cauchy_passed=True)
        return ConvergenceVerdict(CONVERGENT, total, evidence=evidence)

    n_max = policy.n_max
    sums = parseval_partial_sums(stream, n_max)
    if not np.all(np.isfinite(sums)):
        return ConvergenceVerdict(DIVERGENT, growth_law="partial sums overflow (exponential growth)", evidence=evidence)
    checkpoints = [policy.start << j for j in range(policy.doublings + 1)]
    s = [float(sums[n]) for n in checkpoints]
    d = [s[j + 1] - s[j] for j in range(len(s) - 1)]
    ratios = [d[j + 1] / d[j] if d[j] != 0 else math.inf for j in range(len(d) - 1)]
    evidence.update(checkpoints=checkpoints, partial_sums=s, doubling_differences=d, ratios=ratios)

    sq = stream.weighted_sq(n_max)
    lo = checkpoints[-3]
    tail = sq[lo:]
    if np.all(tail == 0):
        evidence.update(cauchy_passed=True, note="coefficients vanish beyond window")
        return ConvergenceVerdict(CONVERGENT, s[-1], evidence=evidence)
    try:
        fit = decay_exponent(stream, (lo, n_max))
    except WindowError:
        # streams with structural zeros (e.g. every other index) are fitted on
        # their nonzero entries; if too few remain, judge on increments alone
        fit = _fit_nonzero(tail, lo)
        if fit is not None:
            evidence["fit_note"] = "fitted on nonzero coefficients only"
    e = fit.exponent if fit else None

    recent = ratios[len(ratios) // 2 :]
    negligible = all(abs(x) <= policy.tolerance * max(1.0, abs(s[-1])) for x in d[-2:])
    shrinking = negligible or all(0 <= r <= 2.0 ** (-policy.margin) for r in recent)
    evidence["cauchy_passed"] = bool(shrinking)

    if e is None:
        if shrinking:
            return ConvergenceVerdict(CONVERGENT, s[-1], evidence=evidence)
        return ConvergenceVerdict(INCONCLUSIVE, growth_law="irregular increments", evidence=evidence)

    if e < -1 - policy.margin and shrinking:
        ratio = 2.0 ** (e + 1)
        est = _continue_doublings(s[-2], s[-1], ratio)
        evidence["tail_method"] = "doubling increments continued geometrically with ratio 2^(e+1)"
        evidence["tail_estimate"] = est - s[-1]
        return ConvergenceVerdict(CONVERGENT, est, fit=fit, evidence=evidence)
    if e >= -1 + policy.margin or (e >= -1 - policy.margin and not shrinking):
        if abs(e + 1) <= policy.margin:
            law = "partial sums grow logarithmically (harmonic-type)"
        else:
            law = f"partial sums grow like N^{e + 1:.3g}"
        return ConvergenceVerdict(DIVERGENT, growth_law=law, fit=fit, evidence=evidence)
    return ConvergenceVerdict(INCONCLUSIVE, fit=fit, evidence=evidence)


@dataclass(frozen=True)
class WeakInnerProduct:
    value: float
    converged: bool
    partial_sums: dict


def weak_inner_product(f_stream: CoefficientStream, g, k: int | None = None, n_max: int = 256,
                       tolerance: float = 1e-8) -> WeakInnerProduct:
    """lim_N sum_{nu<=N} c_nu(f) c_nu(g), with f given only by its (possibly formal) stream.

    ``g`` is a member function (its coefficients are projected in the same
    basis) or a coefficient stream on the same basis.
    """
    basis = f_stream.basis
    if getattr(basis, "kind", None) != "guseinov":
        raise DomainError("weak inner products are defined on Guseinov bases")
    kk = basis.k if k is None else k
    if isinstance(g, SphericalFunction):
        if (g.ell, g.m) != (basis.ell, basis.m):
            return WeakInnerProduct(0.0, True, {})
        member, reason = radial.membership(g, kk)
        if not member:
            raise DomainError(f"g must belong to the space: {reason}")
        g_stream = projected_stream(g, kk, basis.beta)
    else:
        g_stream = g
    if g_stream.terminates_at is not None and g_stream.terminates_at <= n_max:
        j = g_stream.terminates_at
        val = math.fsum((f_stream.coeffs(j) * g_stream.coeffs(j)).tolist())
        return WeakInnerProduct(val, True, {j: val})
    prod = f_stream.coeffs(n_max) * g_stream.coeffs(n_max)
    partial = {}
    n = 8
    while n <= n_max:
        partial[n] = math.fsum(prod[: n + 1].tolist())
        n *= 2
    keys = sorted(partial)
    diffs = [partial[b] - partial[a] for a, b in zip(keys, keys[1:])]
    scale = max(1.0, abs(partial[keys[-1]]))
    converged = len(diffs) >= 2 and abs(diffs[-1]) <= tolerance * scale
    value = partial[keys[-1]]
    if not converged and len(diffs) >= 2 and diffs[-2] != 0:
        r = diffs[-1] / diffs[-2]
        if 0 < r < 0.75:
            value = _continue_doublings(partial[keys[-2]], partial[keys[-1]], r)
            converged = abs(value - partial[keys[-1]]) <= 1e3 * tolerance * scale
    return WeakInnerProduct(float(value), bool(converged), partial)


def admissibility_check(f, g: SphericalFunction, k: int) -> tuple[bool, str]:
    """Whether (f | r^k | g) exists: g in the space and f g r^{k+2} integrable term-wise.

    ``f`` may be a function or a coefficient stream carrying its target.
    """
    if isinstance(f, CoefficientStream):
        if f.target_function is None:
            raise DomainError("stream has no target function to test")
        f = f.target_function
    member, reason = radial.membership(g, k)
    if not member:
        return False, f"g not in L2_(r^{k}): {reason}"
    if not f.same_channel(g):
        return True, "orthogonal angular channels"
    for c1, p1, g1 in f.radial.terms:
        for c2, p2, g2 in g.radial.terms:
            if c1 == 0 or c2 == 0:
                continue
            p = p1 + p2 + k + 2
            if not p > -1:
                return False, f"integrand ~ r^{float(p):g} at the origin"
            if not g1 + g2 > 0:
                return False, "integrand does not decay at infinity"
    return True, "integrable"
