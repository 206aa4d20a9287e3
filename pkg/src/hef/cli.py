"""Command-line front end.

Exit codes: 0 ok, 1 an identity check failed, 2 invalid input, 3 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from .abel import AbelMap
from .bielliptic import BiellipticFamily, build_family, zeta_sqrt_branch
from .cache import PeriodCache
from .curves import CurveSpec, cpair, curve_from_json, curve_to_json, from_cpair, point_from_json
from .errors import HefError, InvalidInput
from .periods import legendre_residuals
from .reduction import (CurveTools, ReductionContext, as_record, corollary_pipeline, corollary_point,
                        relative_error, wpV_on_L1, wpV_on_L2)
from .theta_sigma import SigmaEvaluator, radius_for_tolerance
from .verify import SUITES, VerifyConfig, run_suites, verification_families

EXIT_OK, EXIT_IDENTITY, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


@dataclass
class RunConfig:
    theta_tolerance: float = 1e-12
    quadrature_tolerance: float = 1e-11
    rng_seed: int = 0
    output_path: str | None = None
    precision_report: bool = False


def _complex(text: str) -> complex:
    text = text.replace(" ", "")
    try:
        if "/" in text:
            return complex(Fraction(text))
        return complex(text.replace("i", "j"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _complex_list(text: str) -> list[complex]:
    return [_complex(t) for t in text.split(",") if t.strip()]


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("tolerance must be positive")
    return v


def _tojson(obj):
    if isinstance(obj, (complex, np.complexfloating)):
        return cpair(obj)
    if isinstance(obj, np.ndarray):
        return [_tojson(v) for v in obj]
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, dict):
        return {k: _tojson(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_tojson(v) for v in obj]
    return obj


def emit(obj, config: RunConfig):
    text = json.dumps(_tojson(obj), indent=2, sort_keys=True) + "\n"
    if config.output_path:
        Path(config.output_path).write_text(text)
    else:
        sys.stdout.write(text)


def _report_config(cfg: RunConfig) -> dict:
    # the output path does not affect results, so it stays out of the report
    out = asdict(cfg)
    out.pop("output_path")
    return out


def _config(args) -> RunConfig:
    return RunConfig(args.tol_theta, args.tol_quad, args.seed, args.out, args.precision_report)


def _cache(args) -> PeriodCache:
    return PeriodCache(args.cache_dir or os.environ.get("HEF_CACHE_DIR"))


def _read_json(path: str):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise InvalidInput(f"cannot read {path}: {exc}") from None


def family_to_json(fam: BiellipticFamily) -> dict:
    p, c, m = fam.params, fam.curves, fam.matrices
    return {
        "parameters": {k: getattr(p, k) for k in ("alpha", "beta", "gamma", "k1", "k2", "a", "b", "c")},
        "curves": {"V": curve_to_json(c.V), "E": curve_to_json(c.E), "C": curve_to_json(c.C),
                   "H_roots": c.H_roots, "W_roots": c.W_roots},
        "matrices": {"K1": m.K1, "K2": m.K2, "L1": m.L1, "L2": m.L2},
        "e_third_root": p.e_root,
        "zeta_sqrt_branch": zeta_sqrt_branch(fam),
        "degenerate_reduction_possible": fam.degenerate_reduction_possible,
    }


def _load_family(args) -> BiellipticFamily:
    if args.family:
        try:
            params = _read_json(args.family)["family"]["parameters"]
        except (KeyError, TypeError):
            raise InvalidInput(f"{args.family} is not a family file") from None
        return build_family(*(from_cpair(params[k]) for k in ("alpha", "beta", "gamma")))
    if None in (args.alpha, args.beta, args.gamma):
        raise InvalidInput("give --family or all of --alpha, --beta, --gamma")
    return build_family(args.alpha, args.beta, args.gamma)


def _load_curve(args) -> CurveSpec:
    if args.curve:
        return curve_from_json(_read_json(args.curve))
    if getattr(args, "family", None) or getattr(args, "alpha", None) is not None:
        return getattr(_load_family(args).curves, args.which)
    raise InvalidInput("give --curve or a family (--family / --alpha --beta --gamma) with --which")


def _tools(curve: CurveSpec, cfg: RunConfig, cache: PeriodCache) -> tuple[CurveTools, str]:
    periods, digest = cache.get(curve, cfg.quadrature_tolerance)
    ev = SigmaEvaluator(curve, periods, trunc_radius=radius_for_tolerance(cfg.theta_tolerance))
    return CurveTools(periods, ev, AbelMap(curve, periods)), digest


def _u_vector(values, g: int) -> np.ndarray:
    if len(values) != g:
        raise InvalidInput(f"expected {g} components of u, got {len(values)}")
    return np.array(values, dtype=complex)


# commands -------------------------------------------------------------------

def cmd_family(args, cfg):
    emit({"config": _report_config(cfg), "family": family_to_json(_load_family(args))}, cfg)
    return EXIT_OK


def cmd_periods(args, cfg):
    curve = _load_curve(args)
    tools, digest = _tools(curve, cfg, _cache(args))
    p = tools.periods
    out = {"config": _report_config(cfg), "curve": curve_to_json(curve), "period_cache_sha256": digest,
           "omega1": p.omega1, "omega2": p.omega2, "eta1": p.eta1, "eta2": p.eta2, "tau": p.tau,
           "characteristic": [p.char_delta1, p.char_delta2]}
    if cfg.precision_report:
        out["residuals"] = legendre_residuals(p)
    emit(out, cfg)
    return EXIT_OK


def cmd_abel(args, cfg):
    curve = _load_curve(args)
    tools, digest = _tools(curve, cfg, _cache(args))
    if args.y is not None:
        P = point_from_json({"x": cpair(args.x), "y": cpair(args.y)})
        if not curve.contains(P):
            raise InvalidInput(f"({args.x}, {args.y}) is not on the curve")
    else:
        P = curve.lift(args.x, args.sheet)
    emit({"config": _report_config(cfg), "period_cache_sha256": digest, "point": {"x": P.x, "y": P.y},
          "u": tools.abel(P)}, cfg)
    return EXIT_OK


def cmd_wp(args, cfg):
    curve = _load_curve(args)
    tools, digest = _tools(curve, cfg, _cache(args))
    u = _u_vector(args.u, curve.genus)
    P2, P3 = tools.sigma.wp_tensors(u)
    labels = [2 * i + 1 for i in range(curve.genus)]
    wp2 = {f"{labels[i]},{labels[j]}": P2[i, j] for i in range(curve.genus) for j in range(i, curve.genus)}
    wp3 = {f"{labels[i]},{labels[j]},{labels[k]}": P3[i, j, k] for i in range(curve.genus)
           for j in range(i, curve.genus) for k in range(j, curve.genus)}
    emit({"config": _report_config(cfg), "period_cache_sha256": digest, "u": u, "sigma": tools.sigma.sigma(u),
          "wp2": wp2, "wp3": wp3}, cfg)
    return EXIT_OK


def _context(fam: BiellipticFamily, cfg: RunConfig, cache: PeriodCache) -> tuple[ReductionContext, dict]:
    periods, digests = {}, {}
    for name in ("V", "E", "C"):
        periods[name], digests[name] = cache.get(getattr(fam.curves, name), cfg.quadrature_tolerance)
    ctx = ReductionContext.build(fam, periods, cfg.quadrature_tolerance, cfg.theta_tolerance)
    return ctx, digests


def cmd_reduce(args, cfg):
    fam = _load_family(args)
    ctx, digests = _context(fam, cfg, _cache(args))
    if args.kind == "elliptic":
        (u,) = _u_vector(args.u, 1)
        values, point = wpV_on_L1(ctx, u), ctx.L1 * u
    elif args.kind == "genus2":
        u = _u_vector(args.u, 2)
        values, point = wpV_on_L2(ctx, u), ctx.L2 @ u
    else:
        u = _u_vector(args.u, 3)
        values, point = corollary_pipeline(ctx, u[0], u[1:]), corollary_point(ctx, u[0], u[1:])
    direct = ctx.direct_V(point)
    emit({"config": _report_config(cfg), "period_cache_sha256": digests, "kind": args.kind, "u": args.u,
          "point_on_V": point, "values": as_record(values), "direct_sigma": as_record(direct),
          "relative_residual": relative_error(values, direct)}, cfg)
    return EXIT_OK


def cmd_verify(args, cfg):
    vcfg = VerifyConfig(seed=cfg.rng_seed, n_families=args.families, quad_tol=cfg.quadrature_tolerance,
                        theta_tol=cfg.theta_tolerance)
    cache = _cache(args)
    contexts, digests = [], []
    for fam in verification_families(vcfg):
        ctx, d = _context(fam, cfg, cache)
        contexts.append(ctx)
        digests.append(d)
    names = "all" if args.suite == "all" else [args.suite]
    results = run_suites(names, vcfg, contexts)
    failures = [f for r in results for f in r.failures()]
    emit({"config": {**_report_config(cfg), "families": args.families, "suite": args.suite},
          "period_cache_sha256": digests, "suites": [r.to_json() for r in results],
          "passed": not failures}, cfg)
    if failures:
        print(f"identity failed: {failures[0]}", file=sys.stderr)
        return EXIT_IDENTITY
    return EXIT_OK


def _parse_component(text: str, g: int) -> tuple[int, ...]:
    idx = tuple(int(c) for c in text.replace(",", ""))
    if len(idx) not in (2, 3) or any(i % 2 == 0 or i > 2 * g - 1 for i in idx):
        raise InvalidInput(f"component {text!r} is not a p-function index for genus {g}")
    return idx


def cmd_plotdata(args, cfg):
    """JSON lines {u, value}; the grid moves the first coordinate of u, the rest come from --base."""
    curve = _load_curve(args)
    g = curve.genus
    comp = _parse_component(args.component, g)
    base = _u_vector(args.base, g - 1) if args.base else np.zeros(g - 1, dtype=complex)
    records = []
    nr, ni = args.n_re, args.n_im
    if nr * ni > 0:
        tools, _ = _tools(curve, cfg, _cache(args))
        res = np.linspace(args.re[0], args.re[1], nr)
        ims = np.linspace(args.im[0], args.im[1], ni)
        pos = tuple((i - 1) // 2 for i in comp)
        for b in ims:
            for a in res:
                u = np.concatenate([[complex(a, b)], base])
                value = None
                try:
                    if tools.sigma.theta_ratio(u) >= args.divisor_tol:
                        P2, P3 = tools.sigma.wp_tensors(u)
                        value = P2[pos] if len(pos) == 2 else P3[pos]
                        value = cpair(value) if np.isfinite(value) else None
                except HefError:
                    pass
                records.append({"u": [cpair(z) for z in u], "value": value})
    text = "".join(json.dumps(r, sort_keys=True) + "\n" for r in records)
    if cfg.output_path:
        Path(cfg.output_path).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-theta", type=_positive, default=1e-12, help="theta-series truncation tolerance")
    common.add_argument("--tol-quad", type=_positive, default=1e-11, help="period quadrature tolerance")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--cache-dir", help="period cache directory (default: $HEF_CACHE_DIR, else no cache)")
    common.add_argument("--precision-report", action="store_true")

    fam_args = argparse.ArgumentParser(add_help=False)
    fam_args.add_argument("--family", help="family JSON written by the 'family' command")
    fam_args.add_argument("--alpha", type=_complex)
    fam_args.add_argument("--beta", type=_complex)
    fam_args.add_argument("--gamma", type=_complex)

    curve_args = argparse.ArgumentParser(add_help=False, parents=[fam_args])
    curve_args.add_argument("--curve", help="curve JSON {genus, lambda}")
    curve_args.add_argument("--which", choices=("V", "E", "C"), default="V", help="curve of the family")

    parser = argparse.ArgumentParser(prog="hef", description="Hyperelliptic sigma/p-functions and the "
                                     "reduction of a bielliptic genus-3 curve.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("family", parents=[common, fam_args], help="build the family V, E, C and matrices")
    p.set_defaults(func=cmd_family)

    p = sub.add_parser("periods", parents=[common, curve_args], help="period matrices and characteristic")
    p.set_defaults(func=cmd_periods)

    p = sub.add_parser("abel", parents=[common, curve_args], help="Abel image of a point")
    p.add_argument("--x", type=_complex, required=True)
    p.add_argument("--y", type=_complex)
    p.add_argument("--sheet", type=int, choices=(-1, 1), default=1)
    p.set_defaults(func=cmd_abel)

    p = sub.add_parser("wp", parents=[common, curve_args], help="sigma and p-functions at u")
    p.add_argument("--u", type=_complex_list, required=True,
                   help="comma-separated components, e.g. --u=0.3+0.1j,-0.2j")
    p.set_defaults(func=cmd_wp)

    p = sub.add_parser("reduce", parents=[common, fam_args], help="restricted p-functions of V")
    p.add_argument("kind", choices=("elliptic", "genus2", "corollary"))
    p.add_argument("--u", type=_complex_list, required=True,
                   help="comma-separated components, e.g. --u=0.3+0.1j,-0.2j")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("verify", parents=[common], help="run identity suites")
    p.add_argument("suite", choices=("all",) + SUITES)
    p.add_argument("--families", type=int, default=3)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("plotdata", parents=[common, curve_args], help="grid of p-values as JSON lines")
    p.add_argument("--component", default="11", help="index such as 11, 13 or 111")
    p.add_argument("--re", type=float, nargs=2, default=(-1.0, 1.0))
    p.add_argument("--im", type=float, nargs=2, default=(-1.0, 1.0))
    p.add_argument("--n-re", type=int, default=10)
    p.add_argument("--n-im", type=int, default=10)
    p.add_argument("--base", type=_complex_list, help="remaining coordinates of u, comma-separated")
    p.add_argument("--divisor-tol", type=float, default=1e-6,
                   help="cells whose relative |theta| is below this are emitted as null")
    p.set_defaults(func=cmd_plotdata)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cfg = _config(args)
    try:
        return args.func(args, cfg)
    except HefError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
