"""Restricted p-functions of the bielliptic genus-3 curve V and the genus-3 addition formula.

Six-value records are arrays ordered as WP_KEYS:
(p_11, p_13, p_15, p_111, p_113, p_115) of V at one point of C^3.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .abel import AbelMap
from .bielliptic import BiellipticFamily, FamilyParameters
from .curves import CurvePoint, mu_coefficients
from .errors import (DegenerateConfiguration, DenominatorVanishes, DivisionRemainderTooLarge, NearDegenerate,
                     SingularGMatrix)
from .periods import QUAD_TOL, PeriodData, compute_periods
from .theta_sigma import DEFAULT_THETA_TOL, SigmaEvaluator, radius_for_tolerance

WP_KEYS = ("11", "13", "15", "111", "113", "115")
GUARD_TOL = 1e-10
REMAINDER_TOL = 1e-8
DEGENERACY_TOL = 1e-10


def as_record(values) -> dict:
    return dict(zip(WP_KEYS, (complex(v) for v in values)))


def relative_error(a, b) -> float:
    """Componentwise |a - b| / max(1, |b|), maximised."""
    a, b = np.asarray(a, dtype=complex), np.asarray(b, dtype=complex)
    return float(np.max(np.abs(a - b) / np.maximum(1.0, np.abs(b))))


# evaluation context ---------------------------------------------------------

@dataclass
class CurveTools:
    periods: PeriodData
    sigma: SigmaEvaluator
    abel: AbelMap


def curve_tools(curve, periods: PeriodData | None = None, quad_tol: float = QUAD_TOL,
                theta_tol: float = DEFAULT_THETA_TOL) -> CurveTools:
    periods = periods or compute_periods(curve, quad_tol=quad_tol)
    ev = SigmaEvaluator(curve, periods, trunc_radius=radius_for_tolerance(theta_tol))
    return CurveTools(periods, ev, AbelMap(curve, periods))


@dataclass
class ReductionContext:
    """Family data plus sigma evaluators and Abel maps for V, E and C."""

    family: BiellipticFamily
    V: CurveTools
    E: CurveTools
    C: CurveTools
    L1: np.ndarray = field(default=None)
    L2: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.L1 is None:
            self.L1 = self.family.matrices.L1[:, 0].copy()
        if self.L2 is None:
            self.L2 = self.family.matrices.L2.copy()

    @classmethod
    def build(cls, family: BiellipticFamily, periods: dict | None = None, quad_tol: float = QUAD_TOL,
              theta_tol: float = DEFAULT_THETA_TOL) -> "ReductionContext":
        periods = periods or {}
        tools = {name: curve_tools(getattr(family.curves, name), periods.get(name), quad_tol, theta_tol)
                 for name in ("V", "E", "C")}
        return cls(family, **tools)

    def direct_V(self, u) -> np.ndarray:
        p2, p3 = self.V.sigma.basic_functions(u)
        return np.concatenate([p2, p3])


# restriction to the image of L1 (elliptic factor) ------------------------

def elliptic_closed_form(params: FamilyParameters, wp: complex, wpp: complex) -> np.ndarray:
    al2, k1 = params.alpha ** 2, params.k1
    return np.array([al2 + 1 + wp / k1 ** 2, -al2, 0, wpp / k1 ** 3, 0, 0], dtype=complex)


@dataclass
class EllipticRestriction:
    family: BiellipticFamily
    sigma: SigmaEvaluator

    def wp_pair(self, u: complex) -> tuple[complex, complex]:
        P2, P3 = self.sigma.wp_tensors([u])
        return complex(P2[0, 0]), complex(P3[0, 0, 0])

    def ode_residual(self, u: complex) -> float:
        """|p'^2 - 4 N_E(p)| relative to |p'^2|."""
        wp, wpp = self.wp_pair(u)
        lhs, rhs = wpp ** 2, 4 * self.sigma.curve.N(wp)
        return float(abs(lhs - rhs) / max(1.0, abs(lhs)))

    def values(self, u: complex) -> np.ndarray:
        return elliptic_closed_form(self.family.params, *self.wp_pair(u))


def wpV_on_L1(ctx: ReductionContext, u: complex) -> np.ndarray:
    return EllipticRestriction(ctx.family, ctx.E.sigma).values(u)


# restriction to the image of L2 (genus-2 factor) ------------------------

def genus2_closed_form(params: FamilyParameters, mu: np.ndarray, p2, p3, p4, p5) -> np.ndarray:
    """The six p-values of V at L2 u from p2 = p_11, p3 = p_111, p4 = p_13, p5 = p_113 of C at u."""
    al, k2 = params.alpha, params.k2
    scale = 1.0 + abs(p2) + abs(p4)
    if abs(p4) <= GUARD_TOL * scale:
        raise DenominatorVanishes("p4")
    s = p2 + p4 - 1
    if abs(s) <= GUARD_TOL * scale:
        raise DenominatorVanishes("1-p2-p4")
    mu2, mu4, mu6 = mu[1], mu[2], mu[3]
    m = 1 - p2 - p4

    D1 = (p2 * p4 * p5 - 3 * p4 * p5 - p2 ** 2 * p5 + 2 * p2 * p5 - p5
          - p3 * p4 ** 2 + p2 * p3 * p4 - 3 * p3 * p4)
    D2 = (p2 * p4 ** 2 * p5 + 3 * p4 ** 2 * p5 + 4 * p2 ** 2 * p4 * p5 - 14 * p2 * p4 * p5 + 14 * p4 * p5
          - p2 ** 3 * p5 + p2 ** 2 * p5 + p2 * p5 - p5 - p3 * p4 ** 3 - 4 * p2 * p3 * p4 ** 2
          + 14 * p3 * p4 ** 2 + p2 ** 2 * p3 * p4 + 3 * p3 * p4)
    D3 = (p4 ** 4 + 4 * (p2 + 7) * p4 ** 3 + 2 * (19 * p2 ** 2 - 118 * p2 + 243) * p4 ** 2
          - 4 * (7 * p2 ** 3 - 37 * p2 ** 2 + 77 * p2 - 119) * p4
          + p2 ** 4 - 4 * p2 ** 3 + 6 * p2 ** 2 + 28 * p2 + 33)
    D4 = ((p2 - 1) * p4 ** 4 + 4 * (p2 ** 2 + 14 * p2 - 47) * p4 ** 3
          + 2 * (19 * p2 ** 3 - 137 * p2 ** 2 + 329 * p2 - 323) * p4 ** 2
          - 4 * (7 * p2 ** 4 - 36 * p2 ** 3 + 74 * p2 ** 2 - 76 * p2 + 47) * p4 + (p2 - 1) ** 5)
    D5 = ((p2 ** 2 - 2 * p2 + 33) * p4 ** 4 + 4 * (p2 ** 3 + 21 * p2 ** 2 - 101 * p2 + 119) * p4 ** 3
          + 2 * (19 * p2 ** 4 - 156 * p2 ** 3 + 418 * p2 ** 2 - 492 * p2 + 243) * p4 ** 2
          - 28 * (p2 - 1) ** 5 * p4 + (p2 - 1) ** 6)
    D6 = D1 / (2 * k2 * p4 * s)
    h1 = 4 * al * (p4 + 1) / s
    h2 = 2 * al ** 2 * (5 * p4 ** 2 - 2 * p2 * p4 + 22 * p4 + p2 ** 2 + 2 * p2 + 5) / s ** 2
    h3 = 4 * al ** 3 * (p4 + 1) * (5 * p4 ** 2 - 6 * p2 * p4 + 54 * p4 + 5 * p2 ** 2 + 6 * p2 + 5) / s ** 3

    w11 = D1 ** 2 / (16 * k2 ** 2 * p4 ** 2 * m ** 2) - mu2 - h1
    w13 = al * D1 * D2 / (8 * k2 ** 2 * p4 ** 2 * m ** 3) - mu4 - mu2 * h1 - h2
    w15 = (al ** 2 * (D3 * p3 ** 2 * p4 ** 2 - 2 * D4 * p3 * p4 * p5 + D5 * p5 ** 2)
           / (16 * k2 ** 2 * p4 ** 2 * m ** 4) - mu6 - mu4 * h1 - mu2 * h2 - h3)
    w111 = al * (p2 - 3 * p4 + 3) * (p2 * p5 - p5 - p3 * p4) / (2 * k2 * p4 * s) + w11 * D6
    w113 = (al ** 2 * (3 * p2 * p4 * p5 - p4 * p5 + p2 ** 2 * p5 + 2 * p2 * p5 - 3 * p5
                       - 3 * p3 * p4 ** 2 - p2 * p3 * p4 - p3 * p4) / (2 * k2 * p4 * s) + w13 * D6)
    w115 = al ** 3 * (p3 * p4 - p2 * p5 + p5) / (2 * k2 * p4) + w15 * D6
    return np.array([w11, w13, w15, w111, w113, w115], dtype=complex)


@dataclass
class Genus2Restriction:
    family: BiellipticFamily
    sigma: SigmaEvaluator

    def p_values(self, u) -> tuple[complex, complex, complex, complex]:
        """(p2, p3, p4, p5) = (p_11, p_111, p_13, p_113) of C at u."""
        P2, P3 = self.sigma.wp_tensors(u)
        return complex(P2[0, 0]), complex(P3[0, 0, 0]), complex(P2[0, 1]), complex(P3[0, 0, 1])

    def values(self, u) -> np.ndarray:
        mu = mu_coefficients(self.family.curves.V)
        return genus2_closed_form(self.family.params, mu, *self.p_values(u))


def wpV_on_L2(ctx: ReductionContext, u) -> np.ndarray:
    return Genus2Restriction(ctx.family, ctx.C.sigma).values(u)


def jacobi_points_C(p2, p3, p4, p5) -> list[CurvePoint]:
    """The two points of C with X1 + X2 = p2, X1 X2 = -p4 and 2 Y = -(p3 X + p5)."""
    xs = np.roots([1, -p2, -p4])
    return [CurvePoint(complex(x), complex(-(p3 * x + p5) / 2)) for x in xs]


# four-point oracle -----------------------------------------------------------

def _complete_symmetric(xs: np.ndarray, degree: int) -> list[complex]:
    """h_0 .. h_degree of the given variables, from prod 1/(1 - x_i t)."""
    series = np.zeros(degree + 1, dtype=complex)
    series[0] = 1
    for x in xs:
        geometric = x ** np.arange(degree + 1)
        series = np.convolve(series, geometric)[: degree + 1]
    return list(series)


def hk_oracle(family: BiellipticFamily, points) -> np.ndarray:
    """p-values of V at the sum of the Abel images of four affine points, via the H and L polynomials."""
    if len(points) != 4:
        raise DegenerateConfiguration("need exactly four points")
    V = family.curves.V
    xs = np.array([P.x for P in points], dtype=complex)
    ys = np.array([P.y for P in points], dtype=complex)
    if any(P.is_infinity for P in points):
        raise DegenerateConfiguration("points must be affine")
    gaps = np.abs(xs[:, None] - xs[None, :])[~np.eye(4, dtype=bool)]
    if gaps.min() < 1e-10 * (1 + np.abs(xs).max()):
        raise DegenerateConfiguration("x-coordinates must be distinct")
    if np.min(np.abs(V.roots[:, None] - xs[None, :])) < 1e-12:
        raise DegenerateConfiguration("points must avoid branch points")
    mu = mu_coefficients(V)
    P = np.polynomial.polynomial

    H = np.zeros(4, dtype=complex)   # ascending coefficients
    for k in range(4):
        for l in range(k + 1, 4):
            rest = [i for i in range(4) if i not in (k, l)]
            num = P.polyfromroots(xs[rest])
            den = np.prod([(xs[k] - xs[i]) * (xs[l] - xs[i]) for i in rest])
            H[: len(num)] -= (ys[k] - ys[l]) ** 2 / (xs[k] - xs[l]) ** 2 * num / den
    h = _complete_symmetric(xs, 3)
    for i in range(4):
        H[i] += sum(mu[3 - i - j] * h[j] for j in range(4 - i))

    Lpoly = np.zeros(4, dtype=complex)
    for i in range(4):
        others = np.delete(xs, i)
        Lpoly += ys[i] * (P.polyfromroots(others) - H) / np.prod(xs[i] - others)
    if abs(Lpoly[3]) > 1e-8 * (1 + np.abs(Lpoly).max()):
        raise DegenerateConfiguration("L(x) has a cubic term; the points are inconsistent")
    return np.array([-H[2], -H[1], -H[0], 2 * Lpoly[2], 2 * Lpoly[1], 2 * Lpoly[0]], dtype=complex)


# addition formula ------------------------------------------------------------

@dataclass
class AdditionState:
    c_u: tuple          # (c1, c2, c3, c4) at u
    c_v: tuple
    G_u: np.ndarray
    G_v: np.ndarray
    B_u: np.ndarray
    B_v: np.ndarray
    d1: complex
    d2: complex
    d3: complex
    d5: complex
    d7: complex
    d9: complex
    xy_coefficient: complex
    condition: float

    @property
    def d_vector(self) -> np.ndarray:
        return np.array([self.d9, self.d7, self.d5], dtype=complex)

    def R(self, x, y) -> complex:
        return ((x + self.d2) * y + x ** 3 * (self.d1 * x + self.d3)
                + self.d5 * x ** 2 + self.d7 * x + self.d9)

    def Phi_coefficients(self, f_poly: np.ndarray) -> np.ndarray:
        """Coefficients (highest degree first) of Q^2 f - P^2 with Q = x + d2 and P the y-free part of R."""
        Q = np.array([1, self.d2], dtype=complex)
        Pp = np.array([self.d1, self.d3, self.d5, self.d7, self.d9], dtype=complex)
        return np.polysub(np.polymul(np.polymul(Q, Q), f_poly), np.polymul(Pp, Pp))


def _G(c1: np.ndarray) -> np.ndarray:
    return np.array([[0, 0, c1[0]], [1, 0, c1[1]], [0, 1, c1[2]]], dtype=complex)


def _vectors(values) -> tuple:
    v = np.asarray(values, dtype=complex)
    c1 = np.array([v[2], v[1], v[0]])
    c2 = np.array([v[5], v[4], v[3]]) / 2
    G = _G(c1)
    return (c1, c2, G @ c1, G @ c2), G


def _R_ratio(B_u, c4_u, B_v, c4_v, x, y, det_diff) -> complex:
    M = np.zeros((7, 7), dtype=complex)
    M[0] = [1, x, x * x, x ** 3, y, x ** 4, x * y]
    M[1:4, :3] = np.eye(3)
    M[4:7, :3] = np.eye(3)
    M[1:4, 3:6] = B_u
    M[4:7, 3:6] = B_v
    M[1:4, 6] = c4_u
    M[4:7, 6] = c4_v
    return complex(np.linalg.det(M) / det_diff)


# sample points for the monomial fit; fixed so results are reproducible
_SAMPLES = [(0.31 + 0.2j, 0.7 - 0.1j), (-0.8 + 0.4j, 1.3 + 0.5j), (1.1 - 0.6j, -0.4 + 0.9j),
            (-0.2 - 0.9j, 0.2 - 1.2j), (0.6 + 1.0j, -1.1 - 0.3j), (-1.2 - 0.3j, 0.9 + 0.2j),
            (0.9 + 0.5j, 1.6 - 0.8j)]


def _monomials(x, y) -> list:
    return [y, x * y, x ** 4, x ** 3, x ** 2, x, 1]


def _schur_coefficients(Bu, c4u, Bv, c4v):
    """Coefficients of R from the block structure of the 7x7 determinant.

    Subtracting the u-rows from the v-rows and clearing the identity columns leaves
    R = (xy - z c4(u)) - m . w with m = (x^3 - z c1(u), y - z c2(u), x^4 - z c3(u))
    and (B(v) - B(u)) w = c4(v) - c4(u).
    """
    w = np.linalg.solve(Bv - Bu, c4v - c4u)
    low = -(c4u - Bu @ w)            # coefficients of 1, x, x^2
    return [-w[1], 1.0, -w[2], -w[0], low[2], low[1], low[0]]


def addition_build(u_values, v_values, method: str = "schur") -> AdditionState:
    """Addition data for p-values at u and v.

    ``method="schur"`` reads the coefficients of R from a block elimination of the
    determinant; ``method="sampled"`` evaluates the determinant ratio at seven fixed
    points and solves for the monomial coefficients. Both give the same R.
    """
    cu, Gu = _vectors(u_values)
    cv, Gv = _vectors(v_values)
    Bu = np.column_stack(cu[:3])
    Bv = np.column_stack(cv[:3])
    dB = Bv - Bu
    det_diff = np.linalg.det(dB)
    hadamard = float(np.prod(np.linalg.norm(dB, axis=0)))
    if hadamard == 0.0 or abs(det_diff) <= DEGENERACY_TOL * hadamard:
        raise NearDegenerate(f"|B(v) - B(u)| = {abs(det_diff):.3e}; u and v are too close modulo symmetry")
    if method == "schur":
        coef = _schur_coefficients(Bu, cu[3], Bv, cv[3])
        cond = float(np.linalg.cond(dB))
    elif method == "sampled":
        A = np.array([_monomials(x, y) for x, y in _SAMPLES], dtype=complex)
        rhs = np.array([_R_ratio(Bu, cu[3], Bv, cv[3], x, y, det_diff) for x, y in _SAMPLES])
        coef = np.linalg.solve(A, rhs)
        cond = float(np.linalg.cond(A))
    else:
        raise ValueError(f"unknown method {method!r}")
    cy, cxy, c4, c3, c2, c1, c0 = (complex(c) for c in coef)
    return AdditionState(cu, cv, Gu, Gv, Bu, Bv, d1=c4, d2=cy, d3=c3, d5=c2, d7=c1, d9=c0,
                         xy_coefficient=cxy, condition=cond)


def R_ratio(state: AdditionState, x, y) -> complex:
    """The determinant ratio defining R, evaluated directly (for checking the fitted coefficients)."""
    det_diff = np.linalg.det(state.B_v - state.B_u)
    return _R_ratio(state.B_u, state.c_u[3], state.B_v, state.c_v[3], x, y, det_diff)


def _known_cubic(c1: np.ndarray) -> np.ndarray:
    # x^3 - (c1[0] + c1[1] x + c1[2] x^2)
    return np.array([1, -c1[2], -c1[1], -c1[0]], dtype=complex)


def division_remainder(Phi: np.ndarray, known: np.ndarray) -> float:
    """How far ``known`` is from dividing ``Phi``: |Phi(r)| over sum_k |Phi_k r^k| at each root r of ``known``.

    This measures the remainder on the scale at which Phi can be evaluated, so large
    roots do not inflate it the way raw remainder coefficients are inflated.
    """
    roots = np.roots(known)
    worst = 0.0
    for r in roots:
        scale = np.polyval(np.abs(Phi), max(abs(r), 1.0))
        worst = max(worst, float(abs(np.polyval(Phi, r)) / scale))
    return worst


def wp_add(state: AdditionState, f_poly: np.ndarray, return_remainder: bool = False):
    """Six p-values at u + v from the addition state; ``f_poly`` is V's polynomial, highest degree first."""
    Phi = state.Phi_coefficients(np.asarray(f_poly, dtype=complex))
    known = np.polymul(_known_cubic(state.c_u[0]), _known_cubic(state.c_v[0]))
    q, _ = np.polydiv(Phi, known)
    remainder = division_remainder(Phi, known)
    if remainder > REMAINDER_TOL:
        raise DivisionRemainderTooLarge(f"relative remainder {remainder:.3e}")
    q = q / q[0]
    c1 = np.array([-q[3], -q[2], -q[1]], dtype=complex)
    G = _G(c1)
    A = G + state.d2 * np.eye(3)
    if np.linalg.cond(A) > 1e12:
        raise SingularGMatrix("G(u+v) + d2 I is singular")
    c2 = np.linalg.solve(A, state.d1 * (G @ c1) + state.d3 * c1 + state.d_vector)
    out = np.array([c1[2], c1[1], c1[0], 2 * c2[2], 2 * c2[1], 2 * c2[0]], dtype=complex)
    if return_remainder:
        return out, remainder
    return out


def add_values(u_values, v_values, f_poly) -> np.ndarray:
    return wp_add(addition_build(u_values, v_values), f_poly)


# full-space pipeline ------------------------------------------------------

def corollary_pipeline(ctx: ReductionContext, u1: complex, u35, reverse: bool = False) -> np.ndarray:
    """p-values of V at L (u1, u3, u5) composed from E at u1 and C at (u3, u5)."""
    s1 = wpV_on_L1(ctx, u1)
    s2 = wpV_on_L2(ctx, u35)
    a, b = (s2, s1) if reverse else (s1, s2)
    return add_values(a, b, ctx.family.curves.V.poly)


def corollary_point(ctx: ReductionContext, u1: complex, u35) -> np.ndarray:
    return ctx.L1 * u1 + ctx.L2 @ np.asarray(u35, dtype=complex)
