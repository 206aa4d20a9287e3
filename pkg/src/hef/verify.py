"""Numerical identity suites for the curves, the sigma machinery and the reductions.

Each suite returns a SuiteResult with the worst residual seen, the tolerance and pass/fail.
Random inputs come from a numpy Generator so reports are reproducible for a fixed seed.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .abel import inversion_residual
from .bielliptic import BiellipticFamily, build_family, phi2_preimages, pullback_residual
from .curves import random_points
from .errors import DegenerateFamily, HefError
from .lattice import lattice_residual
from .periods import legendre_residuals, null_loop_integral
from .reduction import (CurveTools, EllipticRestriction, ReductionContext, addition_build,
                        corollary_pipeline, corollary_point, hk_oracle, relative_error, wp_add, wpV_on_L1,
                        wpV_on_L2)

REFERENCE_FAMILY = (1 / 3, 2.0, 3.0)
SUITES = ("matrix", "pullback", "periods", "quasi_periodicity", "jacobi", "theorem51", "theorem52",
          "addition", "corollary", "elliptic_ode")


@dataclass
class SuiteResult:
    """Worst residual of the main identity, plus any secondary bounds as ``checks[label] = (value, tol)``."""

    name: str
    max_residual: float
    tolerance: float
    samples: int
    details: dict = field(default_factory=dict)
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        bounds = [(self.max_residual, self.tolerance), *self.checks.values()]
        return all(bool(np.isfinite(v) and v < t) for v, t in bounds)

    def failures(self) -> list[str]:
        out = []
        if not (np.isfinite(self.max_residual) and self.max_residual < self.tolerance):
            out.append(self.name)
        out += [f"{self.name}.{k}" for k, (v, t) in self.checks.items() if not (np.isfinite(v) and v < t)]
        return out

    def to_json(self) -> dict:
        return {"name": self.name, "max_residual": float(self.max_residual), "tolerance": self.tolerance,
                "samples": self.samples, "passed": self.passed,
                "checks": {k: {"value": float(v), "tolerance": t} for k, (v, t) in self.checks.items()},
                "details": {k: float(v) if isinstance(v, (float, np.floating)) else v
                            for k, v in self.details.items()}}


def random_family(rng: np.random.Generator, min_separation: float = 0.0) -> BiellipticFamily:
    """Rejection-sample complex (alpha, beta, gamma) until the family is valid.

    ``min_separation`` additionally asks the roots of V to be that far apart (the cluster
    0, alpha^2/gamma^2, alpha^2/beta^2 is always tight, so keep it small).
    """
    while True:
        alpha = rng.uniform(0.2, 0.6) * np.exp(1j * rng.uniform(-0.6, 0.6))
        beta = rng.uniform(1.4, 2.6) * np.exp(1j * rng.uniform(-0.5, 0.5))
        gamma = rng.uniform(2.6, 3.6) * np.exp(1j * rng.uniform(-0.5, 0.5))
        try:
            fam = build_family(alpha, beta, gamma)
        except DegenerateFamily:
            continue
        roots = fam.curves.V.roots
        gaps = np.abs(roots[:, None] - roots[None, :])[~np.eye(len(roots), dtype=bool)]
        if gaps.min() >= min_separation:
            return fam


def _fresh_rng(seed: int, label: str) -> np.random.Generator:
    # independent stream per suite so running one suite alone reproduces the same samples
    return np.random.default_rng([seed, sum(map(ord, label))])


# structural suites -----------------------------------------------------------

def suite_matrix(seed: int, n_families: int = 50) -> SuiteResult:
    rng = _fresh_rng(seed, "matrix")
    worst = 0.0
    for _ in range(n_families):
        m = random_family(rng).matrices
        worst = max(worst, float(np.max(np.abs(m.L @ m.K - 2 * np.eye(3)))))
    return SuiteResult("matrix", worst, 1e-12, n_families)


def suite_pullback(seed: int, families: list[BiellipticFamily], n_points: int = 100) -> SuiteResult:
    rng = _fresh_rng(seed, "pullback")
    worst = 0.0
    for fam in families:
        worst = max(worst, pullback_residual(fam, n_points, rng)["max"])
    return SuiteResult("pullback", worst, 1e-9, n_points * len(families))


def path_independence(tools: CurveTools, rng: np.random.Generator, n_points: int = 5) -> float:
    """Abel images computed from different starting branch points agree modulo the lattice."""
    worst = 0.0
    p = tools.periods
    for P in random_points(tools.abel.curve, n_points, rng):
        starts = tools.abel.start_candidates(P.x)[:3]
        vals = [tools.abel(P, start=k) for k in starts]
        for v in vals[1:]:
            worst = max(worst, lattice_residual(v - vals[0], p.omega1, p.omega2))
    return worst


def suite_periods(seed: int, curves: dict[str, CurveTools]) -> SuiteResult:
    rng = _fresh_rng(seed, "periods")
    details, checks, worst = {}, {}, 0.0
    for name, tools in curves.items():
        res = legendre_residuals(tools.periods)
        imag_min = float(np.linalg.eigvalsh(0.5 * (tools.periods.tau.imag + tools.periods.tau.imag.T)).min())
        loop = null_loop_integral(tools.abel.curve)
        path = path_independence(tools, rng)
        details.update({f"{name}.tau_symmetry": res["tau_symmetry"], f"{name}.legendre": res["legendre"],
                        f"{name}.im_tau_min_eig": imag_min, f"{name}.null_loop": loop,
                        f"{name}.path_independence": path})
        worst = max(worst, res["tau_symmetry"], res["legendre"])
        checks[f"{name}.null_loop"] = (loop, 1e-9)
        checks[f"{name}.path_independence"] = (path, 1e-9)
        # Im tau > 0 as a bound on the negated smallest eigenvalue
        checks[f"{name}.im_tau_positive"] = (-imag_min, 0.0)
    return SuiteResult("periods", worst, 1e-8, len(curves), details, checks)


def quasi_periodicity_residual(tools: CurveTools, u, m1, m2) -> float:
    p = tools.periods
    ev = tools.sigma
    m1 = np.asarray(m1, dtype=float)
    m2 = np.asarray(m2, dtype=float)
    Omega = 2 * p.omega1 @ m1 + 2 * p.omega2 @ m2
    ell = 2 * p.eta1 @ m1 + 2 * p.eta2 @ m2
    half = p.omega1 @ m1 + p.omega2 @ m2
    d1, d2 = np.asarray(p.char_delta1), np.asarray(p.char_delta2)
    sign_exp = 2 * (d1 @ m1 - d2 @ m2) + m1 @ m2
    log_factor = ell @ (u + half) + 1j * np.pi * sign_exp
    diff = ev.log_sigma(u + Omega) - ev.log_sigma(u) - log_factor
    return float(abs(np.exp(diff) - 1))


def suite_quasi_periodicity(seed: int, curves: dict[str, CurveTools], n_u: int = 20) -> SuiteResult:
    rng = _fresh_rng(seed, "quasi")
    worst, count = 0.0, 0
    for name, tools in curves.items():
        g = tools.periods.genus
        shifts = list(itertools.product((-1, 0, 1), repeat=2 * g))
        for _ in range(n_u):
            pts = random_points(tools.abel.curve, g, rng)
            u = tools.abel.divisor(pts)
            for m in shifts:
                worst = max(worst, quasi_periodicity_residual(tools, u, m[:g], m[g:]))
                count += 1
    return SuiteResult("quasi_periodicity", worst, 1e-8, count)


def suite_jacobi(seed: int, curves: dict[str, CurveTools], n_configs: int = 20) -> SuiteResult:
    rng = _fresh_rng(seed, "jacobi")
    worst, details = 0.0, {}
    for name, tools in curves.items():
        g = tools.periods.genus
        w = 0.0
        for _ in range(n_configs):
            pts = random_points(tools.abel.curve, g, rng)
            w = max(w, inversion_residual(tools.sigma, pts, tools.abel.divisor(pts))["max"])
        details[name] = w
        worst = max(worst, w)
    return SuiteResult("jacobi", worst, 1e-6, n_configs * len(curves), details)


# reduction suites -----------------------------------------------------------

def _abel_E(ctx: ReductionContext, rng) -> complex:
    return complex(ctx.E.abel(random_points(ctx.family.curves.E, 1, rng)[0])[0])


def _abel_C(ctx: ReductionContext, rng):
    pts = random_points(ctx.family.curves.C, 2, rng)
    return ctx.C.abel.divisor(pts), pts


def suite_theorem51(seed: int, contexts: list[ReductionContext], n_u: int = 20) -> SuiteResult:
    rng = _fresh_rng(seed, "theorem51")
    rel, const = 0.0, 0.0
    for ctx in contexts:
        al2 = ctx.family.params.alpha ** 2
        for _ in range(n_u):
            u = _abel_E(ctx, rng)
            direct = ctx.direct_V(ctx.L1 * u)
            rel = max(rel, relative_error(wpV_on_L1(ctx, u), direct))
            const = max(const, abs(direct[1] + al2), abs(direct[2]), abs(direct[4]), abs(direct[5]))
    return SuiteResult("theorem51", rel, 1e-6, n_u * len(contexts),
                       checks={"constants_absolute": (const, 1e-8)})


def suite_elliptic_ode(seed: int, contexts: list[ReductionContext], n_u: int = 20) -> SuiteResult:
    rng = _fresh_rng(seed, "elliptic_ode")
    worst = 0.0
    for ctx in contexts:
        er = EllipticRestriction(ctx.family, ctx.E.sigma)
        for _ in range(n_u):
            worst = max(worst, er.ode_residual(_abel_E(ctx, rng)))
    return SuiteResult("elliptic_ode", worst, 1e-8, n_u * len(contexts))


def suite_theorem52(seed: int, contexts: list[ReductionContext], n_u: int = 20) -> SuiteResult:
    rng = _fresh_rng(seed, "theorem52")
    cf_d = hk_d = cf_hk = 0.0
    skipped = 0
    for ctx in contexts:
        done = 0
        while done < n_u:
            u, (P1, P2) = _abel_C(ctx, rng)
            try:
                closed = wpV_on_L2(ctx, u)
            except HefError:
                skipped += 1
                continue
            S = list(phi2_preimages(ctx.family, P1)) + list(phi2_preimages(ctx.family, P2))
            oracle = hk_oracle(ctx.family, S)
            direct = ctx.direct_V(ctx.L2 @ u)
            cf_d = max(cf_d, relative_error(closed, direct))
            hk_d = max(hk_d, relative_error(oracle, direct))
            cf_hk = max(cf_hk, relative_error(closed, oracle))
            done += 1
    return SuiteResult("theorem52", cf_d, 1e-6, n_u * len(contexts), {"guard_rejections": skipped},
                       {"oracle_vs_direct": (hk_d, 1e-6), "closed_vs_oracle": (cf_hk, 1e-6)})


def suite_addition(seed: int, contexts: list[ReductionContext], n_pairs: int = 10) -> SuiteResult:
    rng = _fresh_rng(seed, "addition")
    worst = rem = 0.0
    for ctx in contexts:
        V = ctx.family.curves.V
        for _ in range(n_pairs):
            pts = random_points(V, 6, rng)
            u, v = ctx.V.abel.divisor(pts[:3]), ctx.V.abel.divisor(pts[3:])
            out, r = wp_add(addition_build(ctx.direct_V(u), ctx.direct_V(v)), V.poly, return_remainder=True)
            worst = max(worst, relative_error(out, ctx.direct_V(u + v)))
            rem = max(rem, r)
    return SuiteResult("addition", worst, 1e-6, n_pairs * len(contexts),
                       checks={"division_remainder": (rem, 1e-8)})


def suite_corollary(seed: int, contexts: list[ReductionContext], n_u: int = 10) -> SuiteResult:
    rng = _fresh_rng(seed, "corollary")
    worst = order = 0.0
    for ctx in contexts:
        done = 0
        while done < n_u:
            u1 = _abel_E(ctx, rng)
            u35, _ = _abel_C(ctx, rng)
            try:
                out = corollary_pipeline(ctx, u1, u35)
            except HefError:
                continue
            rev = corollary_pipeline(ctx, u1, u35, reverse=True)
            worst = max(worst, relative_error(out, ctx.direct_V(corollary_point(ctx, u1, u35))))
            order = max(order, relative_error(rev, out))
            done += 1
    return SuiteResult("corollary", worst, 1e-5, n_u * len(contexts), {"order_independence": order})


# driver ---------------------------------------------------------------------

@dataclass
class VerifyConfig:
    seed: int = 0
    n_families: int = 3
    quad_tol: float = 1e-11
    theta_tol: float = 1e-12


def verification_families(config: VerifyConfig) -> list[BiellipticFamily]:
    fams = [build_family(*REFERENCE_FAMILY)]
    rng = _fresh_rng(config.seed, "families")
    while len(fams) < config.n_families:
        fams.append(random_family(rng, min_separation=0.005))
    return fams


def run_suites(names, config: VerifyConfig, contexts: list[ReductionContext] | None = None) -> list[SuiteResult]:
    names = list(SUITES) if names in ("all", None) else list(names)
    unknown = set(names) - set(SUITES)
    if unknown:
        raise ValueError(f"unknown suites {sorted(unknown)}")
    if contexts is None:
        contexts = [ReductionContext.build(f, quad_tol=config.quad_tol, theta_tol=config.theta_tol)
                    for f in verification_families(config)]
    ref = contexts[0]
    curves = {"V": ref.V, "E": ref.E, "C": ref.C}
    families = [c.family for c in contexts]
    while len(families) < 5:
        families.append(random_family(_fresh_rng(config.seed + len(families), "extra")))
    s = config.seed
    table = {
        "matrix": lambda: suite_matrix(s),
        "pullback": lambda: suite_pullback(s, families[:5]),
        "periods": lambda: suite_periods(s, curves),
        "quasi_periodicity": lambda: suite_quasi_periodicity(s, curves),
        "jacobi": lambda: suite_jacobi(s, curves),
        "theorem51": lambda: suite_theorem51(s, contexts),
        "theorem52": lambda: suite_theorem52(s, contexts),
        "addition": lambda: suite_addition(s, contexts[:1]),
        "corollary": lambda: suite_corollary(s, contexts[:1]),
        "elliptic_ode": lambda: suite_elliptic_ode(s, contexts),
    }
    return [table[n]() for n in names]
