"""Homology basis, period matrices and the theta characteristic of the Riemann constant.

Branch points e_1, ..., e_(2g+1) are sorted lexicographically by (Re, Im) and
joined by the straight segments s_k = [e_k, e_(k+1)]. Sorting makes the polyline
monotone, so segments only meet at shared endpoints. Lifting s_k to both sheets
gives a closed cycle gamma_k whose period is twice the integral along s_k.

The sheet of each segment is fixed by continuing y counterclockwise around the
shared branch point from s_k to s_(k+1). With that rule every pair of consecutive
cycles meets in the same local picture, so gamma_k . gamma_(k+1) is one constant
sign and the canonical basis is

    a_i = gamma_(2i-1),    b_i = SIGN * (gamma_(2i) + gamma_(2i+2) + ... + gamma_(2g)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .curves import CurveSpec
from .errors import (CharacteristicSearchFailed, DegenerateConfiguration, IllConditioned, OnThetaDivisor,
                     QuadratureNoConvergence, TauNotPositive)

QUAD_TOL = 1e-11
COND_LIMIT = 1e12
N_START = 16
N_MAX = 2 ** 16

# gamma_k . gamma_(k+1) for the sheet rule above (checked by Im(tau) > 0 on every curve)
CHAIN_INTERSECTION = -1


@dataclass(frozen=True)
class HomologyBasis:
    branch_points: np.ndarray
    anchors: np.ndarray            # y at the midpoint of each segment; fixes the sheet
    cycles: tuple                  # 2g cycles (a_1..a_g, b_1..b_g), each ((segment, +-1), ...)

    @property
    def genus(self) -> int:
        return (len(self.branch_points) - 1) // 2

    def coefficient_matrix(self) -> np.ndarray:
        """C[k, c] = multiplicity of segment cycle gamma_k in basis cycle c."""
        g = self.genus
        C = np.zeros((2 * g, 2 * g), dtype=int)
        for c, cyc in enumerate(self.cycles):
            for k, sgn in cyc:
                C[k, c] += sgn
        return C

    def intersection_matrix(self) -> np.ndarray:
        g = self.genus
        T = np.zeros((2 * g, 2 * g), dtype=int)
        for k in range(2 * g - 1):
            T[k, k + 1] = CHAIN_INTERSECTION
            T[k + 1, k] = -CHAIN_INTERSECTION
        C = self.coefficient_matrix()
        return C.T @ T @ C


@dataclass(frozen=True)
class PeriodData:
    omega1: np.ndarray
    omega2: np.ndarray
    eta1: np.ndarray
    eta2: np.ndarray
    tau: np.ndarray
    char_delta1: np.ndarray
    char_delta2: np.ndarray
    basis: HomologyBasis
    segment_periods: np.ndarray    # g x 2g, periods of omega over gamma_k
    branch_abel: np.ndarray        # (2g+1) x g, integral of omega from infinity to e_k
    quad_tol: float = QUAD_TOL

    @property
    def genus(self) -> int:
        return self.omega1.shape[0]

    @property
    def characteristic(self) -> tuple[np.ndarray, np.ndarray]:
        return self.char_delta1, self.char_delta2


def _sqrt_ratio_product(x, others, anchor):
    """prod_j sqrt((x - e_j) / (anchor - e_j)): continuation of y along a straight path from anchor."""
    x = np.asarray(x)
    if len(others) == 0:
        return np.ones_like(x, dtype=complex)
    return np.prod(np.sqrt((x[..., None] - others) / (anchor - others)), axis=-1)


def _germ(y_mid, Q_end, h, phi):
    # coefficient c in y ~ c (x - e)^(1/2) with the half-angle taken from phi
    return y_mid * math.sqrt(2.0) * Q_end / math.sqrt(abs(h)) * np.exp(-0.5j * phi)


def build_homology_basis(curve: CurveSpec) -> HomologyBasis:
    g = curve.genus
    e = np.array(sorted(curve.roots, key=lambda z: (z.real, z.imag)), dtype=complex)
    n_seg = 2 * g
    anchors = np.zeros(n_seg, dtype=complex)
    for k in range(n_seg):
        m = 0.5 * (e[k] + e[k + 1])
        y_mid = complex(np.sqrt(curve.N(m)))
        if k > 0:
            mp, hp = 0.5 * (e[k - 1] + e[k]), 0.5 * (e[k] - e[k - 1])
            h = 0.5 * (e[k + 1] - e[k])
            q_in = _sqrt_ratio_product(e[k], np.delete(e, [k - 1, k]), mp)
            q_out = _sqrt_ratio_product(e[k], np.delete(e, [k, k + 1]), m)
            phi_in = np.angle(-hp)
            turn = (np.angle(h) - phi_in) % (2 * np.pi)
            c_in = _germ(anchors[k - 1], q_in, hp, phi_in)
            c_out = _germ(y_mid, q_out, h, phi_in + turn)
            if (c_out / c_in).real < 0:
                y_mid = -y_mid
        anchors[k] = y_mid
    cycles = [((2 * i, 1),) for i in range(g)]
    for i in range(g):
        cycles.append(tuple((2 * m + 1, CHAIN_INTERSECTION) for m in range(i, g)))
    e.setflags(write=False)
    anchors.setflags(write=False)
    return HomologyBasis(e, anchors, tuple(cycles))


def _converge(fn, tol: float, what: str):
    n = N_START
    prev = fn(n)
    while n < N_MAX:
        n *= 2
        cur = fn(n)
        if np.max(np.abs(cur - prev)) <= tol * max(np.max(np.abs(cur)), 1e-300):
            return cur
        prev = cur
    raise QuadratureNoConvergence(f"{what}: no agreement to {tol:g} with {N_MAX} nodes")


def segment_periods(curve: CurveSpec, basis: HomologyBasis, k: int, numerators, n: int) -> np.ndarray:
    """Periods over gamma_k, i.e. 2 * integral over [e_k, e_(k+1)] of -num(x) dx / (2y), with n Chebyshev nodes."""
    e = basis.branch_points
    m, h = 0.5 * (e[k] + e[k + 1]), 0.5 * (e[k + 1] - e[k])
    t = np.cos((2 * np.arange(1, n + 1) - 1) * np.pi / (2 * n))
    x = m + h * t
    # y = anchor * sqrt(1 - t^2) * Q(t); the square-root factor is the Chebyshev weight
    yq = basis.anchors[k] * _sqrt_ratio_product(x, np.delete(e, [k, k + 1]), m)
    vals = np.array([np.polynomial.polynomial.polyval(x, c) for c in numerators])
    return -h * (np.pi / n) * np.sum(vals / yq, axis=1)


def cycle_integral(curve: CurveSpec, kind: str, i: int, cycle, basis: HomologyBasis | None = None,
                   tol: float = QUAD_TOL) -> complex:
    """Integral of omega_(2i-1) (kind 'first') or eta_(2i-1) (kind 'second') over a cycle."""
    basis = basis or build_homology_basis(curve)
    nums = {"first": curve.first_kind_numerators, "second": curve.second_kind_numerators}[kind]()
    total = 0j
    for k, sgn in cycle:
        vals = _converge(lambda n: segment_periods(curve, basis, k, [nums[i - 1]], n), tol, f"segment {k}")
        total += sgn * vals[0]
    return complex(total)


def reverse_cycle(cycle):
    return tuple((k, -s) for k, s in cycle)


def _ray_to_infinity(curve: CurveSpec, basis: HomologyBasis, tol: float) -> np.ndarray:
    """Integral of omega from e_(2g+1) to infinity along the horizontal ray to the right."""
    e = basis.branch_points
    top, others = e[-1], e[:-1]
    rho = curve.scale
    anchor = top + rho
    y_anchor = complex(np.sqrt(curve.N(anchor)))
    nums = curve.first_kind_numerators()

    def near(n):
        # x = top + rho s^2 absorbs the square-root endpoint
        s, w = np.polynomial.legendre.leggauss(n)
        s, w = 0.5 * (s + 1), 0.5 * w
        x = top + rho * s * s
        Q = _sqrt_ratio_product(x, others, anchor)
        vals = np.array([np.polynomial.polynomial.polyval(x, c) for c in nums])
        return np.sum(w * (-vals * rho / (y_anchor * Q)), axis=1)

    def far(n):
        # x = top + rho / w^2 maps (0, 1] onto [anchor, infinity)
        s, w = np.polynomial.legendre.leggauss(n)
        s, w = 0.5 * (s + 1), 0.5 * w
        x = top + rho / (s * s)
        Q = _sqrt_ratio_product(x, others, anchor)
        vals = np.array([np.polynomial.polynomial.polyval(x, c) for c in nums])
        return np.sum(w * (-vals * rho / (s * s * y_anchor * Q)), axis=1)

    return _converge(near, tol, "ray (near)") + _converge(far, tol, "ray (far)")


def compute_periods(curve: CurveSpec, quad_tol: float = QUAD_TOL, with_characteristic: bool = True) -> PeriodData:
    g = curve.genus
    basis = build_homology_basis(curve)
    w_nums = curve.first_kind_numerators()
    e_nums = curve.second_kind_numerators()
    seg_w = np.zeros((g, 2 * g), dtype=complex)
    seg_e = np.zeros((g, 2 * g), dtype=complex)
    for k in range(2 * g):
        both = _converge(lambda n: segment_periods(curve, basis, k, w_nums + e_nums, n), quad_tol, f"segment {k}")
        seg_w[:, k], seg_e[:, k] = both[:g], both[g:]
    C = basis.coefficient_matrix()
    Ca, Cb = C[:, :g], C[:, g:]
    omega1, omega2 = seg_w @ Ca / 2, seg_w @ Cb / 2
    eta1, eta2 = -seg_e @ Ca / 2, -seg_e @ Cb / 2
    cond = np.linalg.cond(omega1)
    if cond > COND_LIMIT:
        raise IllConditioned(f"cond(omega') = {cond:.3e}")
    tau = np.linalg.solve(omega1, omega2)
    if np.min(np.linalg.eigvalsh(0.5 * (tau.imag + tau.imag.T))) <= 0:
        raise TauNotPositive("Im(tau) not positive definite; homology basis orientation is inconsistent")

    # integral from infinity to each branch point, walking down the chain of segments
    branch_abel = np.zeros((2 * g + 1, g), dtype=complex)
    branch_abel[-1] = -_ray_to_infinity(curve, basis, quad_tol)
    for k in range(2 * g - 1, -1, -1):
        branch_abel[k] = branch_abel[k + 1] - seg_w[:, k] / 2

    zero = np.zeros(g)
    pd = PeriodData(omega1, omega2, eta1, eta2, tau, zero, zero, basis, seg_w, branch_abel, quad_tol)
    if with_characteristic:
        d1, d2 = riemann_characteristic(curve, basis, pd)
        pd = replace(pd, char_delta1=d1, char_delta2=d2)
    return pd


def legendre_residuals(periods: PeriodData) -> dict[str, float]:
    """Residuals of the generalized Legendre relations.

    ``w1^T eta2 - w2^T eta1`` form: w' eta''^T - w'' eta'^T = -(pi i / 2) I, plus symmetry of
    eta' w'^{-1} and of tau.
    """
    w1, w2, e1, e2 = periods.omega1, periods.omega2, periods.eta1, periods.eta2
    g = periods.genus
    H = e1 @ np.linalg.inv(w1)
    leg = w1 @ e2.T - w2 @ e1.T
    return {
        "tau_symmetry": float(np.max(np.abs(periods.tau - periods.tau.T))),
        "eta_omega_symmetry": float(np.max(np.abs(H - H.T))),
        "legendre": float(np.max(np.abs(leg + 0.5j * np.pi * np.eye(g)))),
    }


def null_loop_integral(curve: CurveSpec, n: int = 512) -> float:
    """Integral of every omega and eta over twice a large circle around all branch points.

    The doubled circle bounds a disc around infinity on the curve, so each integral vanishes.
    """
    g = curve.genus
    R = 2.0 * curve.scale
    theta = 4 * np.pi * np.arange(n) / n
    x = R * np.exp(1j * theta)
    # outside all branch points y = x^(g+1/2) prod sqrt(1 - e_j/x), continuous in theta
    y = R ** (g + 0.5) * np.exp(1j * (g + 0.5) * theta) * np.prod(np.sqrt(1 - curve.roots / x[:, None]), axis=1)
    dx = 1j * x * (4 * np.pi / n)
    worst = 0.0
    for c in curve.first_kind_numerators() + curve.second_kind_numerators():
        val = np.sum(-np.polynomial.polynomial.polyval(x, c) / (2 * y) * dx)
        worst = max(worst, abs(val))
    return worst


def _half_characteristics(g: int):
    for code in range(4 ** g):
        bits = [(code >> b) & 1 for b in range(2 * g)]
        yield np.array(bits[:g]) / 2.0, np.array(bits[g:]) / 2.0


def _validation_configurations(curve: CurveSpec, count: int, rng: np.random.Generator):
    from .curves import CurvePoint

    g = curve.genus
    center = np.mean(curve.roots)
    spread = np.max(np.abs(curve.roots - center)) + 0.5
    configs = []
    while len(configs) < count:
        xs = center + spread * (rng.uniform(-1, 1, g) + 1j * rng.uniform(-1, 1, g))
        if np.min(np.abs(xs[:, None] - curve.roots[None, :])) < 0.05 * spread:
            continue
        if g > 1 and np.min(np.abs(xs[:, None] - xs[None, :]) + np.eye(g)) < 0.05 * spread:
            continue
        signs = rng.choice([-1, 1], g)
        configs.append([CurvePoint(complex(x), s * complex(np.sqrt(curve.N(x)))) for x, s in zip(xs, signs)])
    return configs


def riemann_characteristic(curve: CurveSpec, basis: HomologyBasis, periods: PeriodData,
                           n_configs: int = 2, accept: float = 1e-6):
    """Half-integer characteristic [d'; d''] of the Riemann constant for base point infinity.

    All 4^g candidates are tried; the one whose sigma function solves the Jacobi inversion
    problem for a few fixed point configurations is returned.
    """
    from .abel import AbelMap, inversion_residual
    from .theta_sigma import SigmaEvaluator

    rng = np.random.default_rng(20240915)
    abel = AbelMap(curve, periods)
    configs = _validation_configurations(curve, n_configs, rng)
    sums = [sum(abel(P) for P in cfg) for cfg in configs]
    best, best_res = None, math.inf
    for d1, d2 in _half_characteristics(curve.genus):
        ev = SigmaEvaluator(curve, replace(periods, char_delta1=d1, char_delta2=d2))
        res = 0.0
        try:
            for cfg, u in zip(configs, sums):
                res = max(res, inversion_residual(ev, cfg, u)["max"])
        except (OnThetaDivisor, DegenerateConfiguration, ArithmeticError):
            # a wrong characteristic can put the test points on its theta divisor
            continue
        if res < best_res:
            best, best_res = (d1, d2), res
    if best is None or best_res > accept:
        raise CharacteristicSearchFailed(f"best Jacobi-inversion residual {best_res:.3e} > {accept:g}")
    return best
