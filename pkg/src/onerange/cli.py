"""Batch driver: ``python -m onerange <command> [options]``.

Every command writes a JSON report (and CSV data where useful) into the
output directory.  Reports embed the config hash and the Yukawa Parseval
audit.  Exit codes: 0 success, 2 usage error, 3 accuracy failure,
4 divergent integral (only when a finite number was requested).
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
from fractions import Fraction

import numpy as np

from . import addition, convergence, expansions, fourier, guseinov, rearrange
from .config import RunConfig, atomic_write
from .convergence import _jsonable
from .specfun import laguerre_eval_exact
from .errors import AccuracyError, DivergentIntegralError, DivergentTargetError, DomainError, WindowError

log = logging.getLogger("onerange")

EXIT_OK, EXIT_USAGE, EXIT_ACCURACY, EXIT_DIVERGENT = 0, 2, 3, 4


class UsageError(Exception):
    pass


def _float_list(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _orders(text: str) -> list[tuple[int, int]]:
    """'4:2,8:4' -> [(4, 2), (8, 4)]."""
    out = []
    for item in text.split(","):
        n, _, ell = item.partition(":")
        out.append((int(n), int(ell or 0)))
    return out


def _number(text: str):
    """Exact Fraction for rational literals like '1/2' or '0.3', float otherwise."""
    try:
        return Fraction(text)
    except ValueError:
        return float(text)


def _policy(cfg: RunConfig, doublings: int | None = None) -> convergence.ClassifyPolicy:
    return convergence.ClassifyPolicy(cfg.classify_start, doublings or cfg.classify_doublings,
                                      cfg.classify_tolerance, cfg.classify_margin)


def _quad_policy(cfg: RunConfig) -> addition.QuadraturePolicy:
    return addition.QuadraturePolicy(cfg.radial_nodes, cfg.angular_nodes, cfg.quadrature_rtol,
                                     refinements=cfg.quadrature_refinements)


def _report(command: str, cfg: RunConfig, params: dict, result: dict) -> dict:
    audit = expansions.yukawa_prefactor_audit()
    return _jsonable({
        "command": command,
        "config_hash": cfg.config_hash(),
        "config": {k: v for k, v in cfg.to_dict().items() if k != "output_dir"},
        "parameters": params,
        "parseval_audit": {"selected": audit["selected"], "passed": audit["passed"],
                           "candidates": audit["candidates"]},
        "result": result,
    })


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2, allow_nan=False) + "\n"


def _write(cfg: RunConfig, name: str, text: str) -> str:
    path = os.path.join(cfg.output_dir, name)
    atomic_write(path, text)
    return path


# --- commands -----------------------------------------------------------------


def cmd_orthonormality(args, cfg: RunConfig) -> dict:
    if args.k < -1:
        raise UsageError("k must be an integer >= -1")
    if args.n_max < 1:
        raise UsageError("n_max must be >= 1")
    beta = _number(args.beta)
    if not beta > 0:
        raise UsageError("beta must be positive")
    out = {}
    if isinstance(beta, Fraction):
        exact = guseinov.gram_exact(args.k, beta, args.n_max)
        out["rational_max_deviation"] = float(max(abs(v - (1 if a == b else 0)) for (a, b), v in exact.items()))
    else:
        out["rational_max_deviation"] = None
        out["rational_note"] = "beta is not rational; exact path skipped"
    idxs, G = guseinov.gram_quadrature(args.k, float(beta), args.n_max, cfg.gram_nodes)
    out["quadrature_max_deviation"] = float(np.abs(G - np.eye(len(idxs))).max())
    out["size"] = len(idxs)
    rows = ["a_n,a_l,a_m,b_n,b_l,b_m,value"]
    for i, a in enumerate(idxs):
        for j, b in enumerate(idxs):
            if G[i, j] != 0:
                rows.append(f"{a.n},{a.ell},{a.m},{b.n},{b.ell},{b.m},{float(G[i, j])!r}")
    _write(cfg, "gram.csv", "\n".join(rows) + "\n")
    report = _report("orthonormality", cfg, {"k": args.k, "beta": str(args.beta), "n_max": args.n_max}, out)
    _write(cfg, "orthonormality.json", _dump(report))
    return report


def _build_stream(args):
    t = args.target
    if t == "yukawa":
        return expansions.yukawa_in_guseinov(args.k, float(args.beta))
    if t == "coulomb":
        return expansions.coulomb_in_guseinov(args.k, float(args.beta))
    if t == "stf":
        N = _number(args.N)
        if isinstance(N, Fraction) and N.denominator == 1:
            N = int(N)
        beta = _number(args.beta)
        if args.gamma is None or _number(args.gamma) == beta:
            return expansions.stf_in_guseinov_equal_scale(N, args.L, args.M, args.k, beta, formal=True)
        return expansions.stf_in_guseinov_diff_scale(N, args.L, args.M, args.k, beta, _number(args.gamma), formal=True)
    if t == "exppower":
        return expansions.exppower_in_laguerre(_number(args.mu), _number(args.alpha), _number(args.u))
    raise UsageError(f"unknown target {t!r}")


def _exact_crosscheck(stream, n: int) -> float | None:
    if stream.reduced_exact is None or n < 0:
        return None
    c = stream.coeffs(n)
    worst = 0.0
    for nu in range(n + 1):
        ref = stream.exact_float(nu)
        scale = max(abs(ref), 1e-300)
        worst = max(worst, abs(c[nu] - ref) / scale if ref != 0 else abs(c[nu]))
    return worst


def cmd_expand(args, cfg: RunConfig) -> dict:
    stream = _build_stream(args)
    policy = _policy(cfg)
    verdict = convergence.classify(stream, policy)
    if args.order is not None:
        order = args.order
    else:
        order = stream.terminates_at if stream.terminates_at is not None else policy.n_max
    csv_text = expansions.stream_to_csv(stream, order)
    _write(cfg, "coefficients.csv", csv_text)
    result = stream.describe()
    result["verdict"] = verdict.report(norm_target=stream.target_norm_sq, audit_notes=stream.notes)
    result["terminating"] = stream.terminates_at is not None
    result["order"] = order
    result["exact_crosscheck_max_rel"] = _exact_crosscheck(stream, min(order, cfg.exact_crossover))
    if stream.target.get("kind") == "stf" and stream.target.get("beta") != stream.basis.beta:
        nus = range(min(order, 8) + 1)
        direct = [expansions.diff_scale_hyp2f1_direct(float(_number(args.N)), args.L, args.k, float(_number(args.beta)),
                                                      float(_number(args.gamma)), nu) for nu in nus]
        result["hyp2f1_direct_max_abs_diff"] = float(np.max(np.abs(stream.coeffs(len(direct) - 1) - direct)))
    params = {k: v for k, v in vars(args).items() if k not in ("func", "config", "out", "seed")}
    report = _report("expand", cfg, params, result)
    _write(cfg, "verdict.json", _dump(report))
    return report


def cmd_rearrange(args, cfg: RunConfig) -> dict:
    mu, alpha, u = _number(args.mu), _number(args.alpha), _number(args.u)
    stream = expansions.exppower_in_laguerre(mu, alpha, u)
    nus = _int_list(args.nu)
    pre = rearrange.analyticity_precheck(mu, u)
    probes = [rearrange.rearrange_infinite_probe(stream, nu, cfg.probe_terms).to_dict() for nu in nus]
    result = {"analyticity": pre, "probes": probes}
    if pre == rearrange.ANALYTIC:
        # Taylor coefficients of x^mu e^{ux}: u^(nu-mu)/(nu-mu)! for nu >= mu
        m = int(float(mu))
        errs = []
        for p in probes:
            if p["status"] != "Finite":
                continue
            nu = p["nu"]
            coef = (-1) ** nu / math.factorial(nu) * p["value"]
            ref = float(u) ** (nu - m) / math.factorial(nu - m) if nu >= m else 0.0
            errs.append(abs(coef - ref))
        result["taylor_max_abs_error"] = max(errs) if errs else None
    # seeded exact round-trip of a random finite Laguerre sum
    rng = np.random.default_rng(cfg.seed)
    a_exact = alpha if isinstance(alpha, Fraction) else Fraction(0)
    lam = [Fraction(int(x), int(y)) for x, y in zip(rng.integers(-9, 10, 11), rng.integers(1, 10, 11))]
    res = rearrange.rearrange_finite(lam, a_exact)
    x = Fraction(3, 7)
    direct = sum(c * laguerre_eval_exact(n, a_exact, x) for n, c in enumerate(lam))
    result["finite_roundtrip_exact"] = rearrange.polynomial_value(res.coeffs, x) == direct
    params = {"mu": str(args.mu), "alpha": str(args.alpha), "u": str(args.u), "nu": nus}
    report = _report("rearrange", cfg, params, result)
    _write(cfg, "rearrange.json", _dump(report))
    return report


def _ladder_target(args):
    if args.target == "stf":
        N = _number(args.N)
        if isinstance(N, Fraction) and N.denominator == 1:
            N = int(N)
        gamma = float(_number(args.gamma)) if args.gamma is not None else float(_number(args.beta))
        return guseinov.stf_build(guseinov.StfIndex(N, args.L, args.M, gamma))
    raise UsageError(f"unknown addition target {args.target!r}")


def cmd_addition(args, cfg: RunConfig) -> dict:
    orders = _orders(args.orders)
    d = float(args.displacement)
    beta = float(_number(args.beta))
    qp = _quad_policy(cfg)
    params = {k: v for k, v in vars(args).items() if k not in ("func", "config", "out", "seed")}
    if args.target == "coulomb":
        ladder = []
        for n_max, ell_max in orders:
            fld = addition.coulomb_field(args.k, beta, d, n_max, ell_max)
            if not all(math.isfinite(v) for v in fld.values.values()):
                raise AccuracyError("non-finite Coulomb coefficient")
            ladder.append({"n_max": n_max, "ell_max": ell_max, "parseval_mass": fld.parseval_mass()})
        _write(cfg, "field.csv", fld.to_csv())
        verdict = convergence.classify(addition.coulomb_field_stream(args.k, beta, d), _policy(cfg, 5))
        result = {"ladder": ladder, "verdict": verdict.report(norm_target=math.inf), "truncation": fld.summary()["truncation"]}
    else:
        target = _ladder_target(args)
        tc = addition.TwoCenterConfig(target, args.k, beta, d, args.sign, "stf")
        if d == 0:
            fld = addition.coefficient_field(tc, *orders[-1], qp)
            stream = expansions.projected_stream(target, args.k, beta)
            result = {"one_center": True, "stream": stream.describe(), "truncation": fld.summary()["truncation"]}
        else:
            norm = addition.displaced_norm_sq(tc, qp)
            steps = addition.mse_ladder(tc, orders, qp)
            fld = addition.coefficient_field(tc, *orders[-1], qp)
            mses = [s.mse for s in steps]
            result = {
                "norm_sq": norm,
                "ladder": [{"n_max": s.n_max, "ell_max": s.ell_max, "mse": s.mse, "relative_mse": s.mse / norm,
                            "parseval_mass": s.parseval_mass} for s in steps],
                "monotone": all(b < a for a, b in zip(mses, mses[1:])),
                "final_mse_quadrature": addition.mse_quadrature(tc, fld, qp),
                "truncation": fld.summary()["truncation"],
            }
        _write(cfg, "field.csv", fld.to_csv())
    report = _report("addition", cfg, params, result)
    _write(cfg, "addition.json", _dump(report))
    return report


def _density(text: str) -> fourier.InteractionDensity:
    kind, _, a = text.partition(":")
    if kind == "witness":
        return fourier.slow_decay_witness()
    if kind not in ("pure_exponential", "exp_times_r"):
        raise UsageError(f"unknown density {kind!r}")
    return fourier.InteractionDensity(kind, float(a or 1.0))


def cmd_coulomb(args, cfg: RunConfig) -> dict:
    f, g = _density(args.f), _density(args.g)
    rule = fourier.MomentumRule(cfg.momentum_panel_nodes, cfg.momentum_tail_nodes)
    study = fourier.beta_limit_study(f, g, _float_list(args.betas), rule=rule)
    _write(cfg, "beta_limit.csv", study.to_csv())
    result = {
        "coulomb": study.coulomb,
        "verdict": study.verdict,
        "extrapolated_limit": study.extrapolated_limit,
        "details": study.details,
        "rows": [list(r) for r in study.rows],
    }
    if f.kind != "custom" and g.kind != "custom":
        result["plancherel"] = fourier.plancherel_check(f, g, rule)
    report = _report("coulomb", cfg, {"f": args.f, "g": args.g, "betas": args.betas}, result)
    _write(cfg, "coulomb.json", _dump(report))
    return report


# --- argument parsing ------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--config", help="flat JSON key-value config file")
    common.add_argument("--out", help="output directory")
    common.add_argument("--seed", type=int, help="seed for randomized checks")

    p = _Parser(prog="onerange", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("orthonormality", parents=[common])
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--beta", default="1")
    s.add_argument("--n-max", type=int, default=8)
    s.set_defaults(func=cmd_orthonormality)

    s = sub.add_parser("expand", parents=[common])
    s.add_argument("--target", choices=["yukawa", "coulomb", "stf", "exppower"], required=True)
    s.add_argument("--k", type=int, default=0)
    s.add_argument("--beta", default="1")
    s.add_argument("--gamma", default=None, help="basis scale for different-scale STF expansions")
    s.add_argument("--N", default="1")
    s.add_argument("--L", type=int, default=0)
    s.add_argument("--M", type=int, default=0)
    s.add_argument("--mu", default="1/2")
    s.add_argument("--alpha", default="0")
    s.add_argument("--u", default="0")
    s.add_argument("--order", type=int, default=None)
    s.set_defaults(func=cmd_expand)

    s = sub.add_parser("rearrange", parents=[common])
    s.add_argument("--mu", required=True)
    s.add_argument("--alpha", default="0")
    s.add_argument("--u", default="0")
    s.add_argument("--nu", default="0,1,2,3")
    s.set_defaults(func=cmd_rearrange)

    s = sub.add_parser("addition", parents=[common])
    s.add_argument("--target", choices=["stf", "coulomb"], default="stf")
    s.add_argument("--N", default="1")
    s.add_argument("--L", type=int, default=0)
    s.add_argument("--M", type=int, default=0)
    s.add_argument("--gamma", default=None, help="target exponent (defaults to the basis beta)")
    s.add_argument("--k", type=int, default=0)
    s.add_argument("--beta", default="1")
    s.add_argument("--displacement", type=float, default=0.5)
    s.add_argument("--sign", choices=["minus", "plus"], default="minus")
    s.add_argument("--orders", default="4:2,8:4,12:6")
    s.set_defaults(func=cmd_addition)

    s = sub.add_parser("coulomb", parents=[common])
    s.add_argument("--f", default="pure_exponential:1")
    s.add_argument("--g", default="pure_exponential:1")
    s.add_argument("--betas", default="0.1,0.01,0.001,0.0001")
    s.set_defaults(func=cmd_coulomb)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        cfg = RunConfig.load(args.config) if args.config else RunConfig()
        cfg = cfg.with_overrides(output_dir=args.out, seed=args.seed)
        report = args.func(args, cfg)
    except (UsageError, DomainError, WindowError, DivergentTargetError, ValueError) as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except AccuracyError as exc:
        print(f"accuracy failure: {exc}", file=sys.stderr)
        return EXIT_ACCURACY
    except DivergentIntegralError as exc:
        print(f"divergent integral: {exc}", file=sys.stderr)
        return EXIT_DIVERGENT
    print(json.dumps(report["result"], sort_keys=True)[:2000] if isinstance(report, dict) else "")
    return EXIT_OK
