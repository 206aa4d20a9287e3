"""The bielliptic genus-3 family V and its quotients E (genus 1) and C (genus 2).

For parameters (alpha, beta, gamma) the curve V is y^2 = f(x) with

    f(x) = x (x - 1)(x - alpha^2)(x - beta^2)(x - gamma^2)(x - alpha^2/beta^2)(x - alpha^2/gamma^2).

The degree-2 maps phi1: V -> E and phi2: V -> C induce the linear maps K1, K2 on
C^3 and their transposes-up-to-isogeny L1, L2, with L K = 2 I.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curves import INFINITY, CurvePoint, CurveSpec, curve_from_roots, differential_first_kind, random_points
from .errors import AtPole, DegenerateFamily, InvalidInput

DEGENERACY_TOL = 1e-12
FURTHER_REDUCTION_TOL = 1e-10


class Dual:
    """Complex value with a first derivative, enough to differentiate rational maps."""

    __slots__ = ("v", "d")

    def __init__(self, v, d=0.0):
        self.v = complex(v)
        self.d = complex(d)

    @staticmethod
    def _lift(o):
        return o if isinstance(o, Dual) else Dual(o)

    def __add__(self, o):
        o = self._lift(o)
        return Dual(self.v + o.v, self.d + o.d)

    __radd__ = __add__

    def __neg__(self):
        return Dual(-self.v, -self.d)

    def __sub__(self, o):
        return self + (-self._lift(o))

    def __rsub__(self, o):
        return self._lift(o) - self

    def __mul__(self, o):
        o = self._lift(o)
        return Dual(self.v * o.v, self.d * o.v + self.v * o.d)

    __rmul__ = __mul__

    def __truediv__(self, o):
        o = self._lift(o)
        return Dual(self.v / o.v, (self.d * o.v - self.v * o.d) / (o.v * o.v))

    def __rtruediv__(self, o):
        return self._lift(o) / self

    def __pow__(self, n: int):
        return Dual(self.v ** n, n * self.v ** (n - 1) * self.d)


@dataclass(frozen=True)
class FamilyParameters:
    alpha: complex
    beta: complex
    gamma: complex
    k1: complex
    k2: complex
    a: complex
    b: complex
    c: complex

    @property
    def e_root(self) -> complex:
        """Third root of E: k1^2 (1 - 1/gamma^2)(gamma^2 - alpha^2)."""
        al, g = self.alpha, self.gamma
        return self.k1 ** 2 * (1 - 1 / g ** 2) * (g ** 2 - al ** 2)

    def f_roots(self) -> np.ndarray:
        al, be, ga = self.alpha, self.beta, self.gamma
        return np.array([0, 1, al ** 2, be ** 2, ga ** 2, al ** 2 / be ** 2, al ** 2 / ga ** 2], dtype=complex)


@dataclass(frozen=True)
class FamilyCurves:
    V: CurveSpec
    E: CurveSpec
    C: CurveSpec
    H_roots: np.ndarray   # t^2 = prod (s - r)
    W_roots: np.ndarray   # T^2 = prod (S - r)


@dataclass(frozen=True)
class ReductionMatrices:
    K1: np.ndarray   # 1 x 3
    K2: np.ndarray   # 2 x 3
    L1: np.ndarray   # 3 x 1
    L2: np.ndarray   # 3 x 2

    @property
    def K(self) -> np.ndarray:
        return np.vstack([self.K1, self.K2])

    @property
    def L(self) -> np.ndarray:
        return np.hstack([self.L1, self.L2])


@dataclass(frozen=True)
class BiellipticFamily:
    params: FamilyParameters
    curves: FamilyCurves
    matrices: ReductionMatrices
    degenerate_reduction_possible: bool = False


def _nonzero(value, scale, condition):
    if abs(value) <= DEGENERACY_TOL * max(1.0, scale):
        raise DegenerateFamily(condition)


def family_constants(alpha, beta, gamma) -> FamilyParameters:
    al, be, ga = complex(alpha), complex(beta), complex(gamma)
    _nonzero(be * ga, abs(be) * abs(ga), "beta*gamma != 0")
    _nonzero(al, 1.0, "alpha != 0")
    d1 = (1 - be ** 2) * (be ** 2 - al ** 2)
    _nonzero(d1, abs(be) ** 4, "(1-beta^2)(beta^2-alpha^2) != 0")
    d2 = (1 - al) * (be ** 2 - al) * (ga ** 2 - al)
    _nonzero(d2, (abs(be) * abs(ga)) ** 2, "(1-alpha)(beta^2-alpha)(gamma^2-alpha) != 0")
    k1 = 1j * be / np.sqrt(complex(d1))
    k2 = 4j * al * be * ga / d2
    a = (1 + al) / (1 - al)
    b = (be ** 2 + al) / (be ** 2 - al)
    c = (ga ** 2 + al) / (ga ** 2 - al)
    return FamilyParameters(al, be, ga, complex(k1), complex(k2), complex(a), complex(b), complex(c))


def reduction_matrices(p: FamilyParameters) -> ReductionMatrices:
    al, k1, k2 = p.alpha, p.k1, p.k2
    K1 = np.array([[1, 0, -al ** 2]], dtype=complex) / k1
    K2 = -np.array([[1, 2 * al, al ** 2], [1, -2 * al, al ** 2]], dtype=complex) / k2
    L1 = k1 * np.array([[1], [0], [-al ** -2]], dtype=complex)
    L2 = -0.5 * k2 * np.array([[1, 1], [1 / al, -1 / al], [al ** -2, al ** -2]], dtype=complex)
    return ReductionMatrices(K1, K2, L1, L2)


def reduces_further(p: FamilyParameters) -> bool:
    """True when a^2 = b^2 c^2 (or a permutation), the case where C itself reduces further."""
    a2, b2, c2 = p.a ** 2, p.b ** 2, p.c ** 2
    for lhs, rhs in ((a2, b2 * c2), (b2, a2 * c2), (c2, a2 * b2)):
        if abs(lhs - rhs) <= FURTHER_REDUCTION_TOL * (1 + abs(lhs)):
            return True
    return False


def build_family(alpha, beta, gamma) -> BiellipticFamily:
    p = family_constants(alpha, beta, gamma)
    try:
        V = curve_from_roots(p.f_roots())
    except InvalidInput:
        raise DegenerateFamily("f(x) has no multiple roots") from None
    try:
        E = curve_from_roots([0, 1, p.e_root])
        C = curve_from_roots([0, 1, p.a ** 2, p.b ** 2, p.c ** 2])
    except InvalidInput as exc:
        raise DegenerateFamily(f"E and C nonsingular ({exc})") from None
    H_roots = np.array([1, -1, p.a, -p.a, p.b, -p.b, p.c, -p.c], dtype=complex)
    W_roots = np.array([1, p.a ** 2, p.b ** 2, p.c ** 2], dtype=complex)
    curves = FamilyCurves(V, E, C, H_roots, W_roots)
    return BiellipticFamily(p, curves, reduction_matrices(p), reduces_further(p))


# morphisms ----------------------------------------------------------------

def _phi1_xy(p: FamilyParameters, x, y):
    return p.k1 ** 2 * (x - 1) * (x - p.alpha ** 2) / x, p.k1 ** 3 * y / x ** 2


def _phi2_xy(p: FamilyParameters, x, y):
    al = p.alpha
    return ((x + al) / (x - al)) ** 2, 4 * al * p.k2 * (x + al) * y / (x - al) ** 5


def phi1(fam: BiellipticFamily, P: CurvePoint) -> CurvePoint:
    """V -> E; infinity and (0, 0) both go to infinity."""
    if P.is_infinity or P.x == 0:
        return INFINITY
    X, Y = _phi1_xy(fam.params, P.x, P.y)
    return CurvePoint(complex(X), complex(Y))


def phi2(fam: BiellipticFamily, P: CurvePoint) -> CurvePoint:
    """V -> C; infinity goes to (1, 0). x = alpha is a pole."""
    if P.is_infinity:
        return CurvePoint(1 + 0j, 0j)
    if P.x == fam.params.alpha:
        raise AtPole("phi2 has a pole at x = alpha")
    X, Y = _phi2_xy(fam.params, P.x, P.y)
    return CurvePoint(complex(X), complex(Y))


def phi1_preimages(fam: BiellipticFamily, Q: CurvePoint) -> tuple[CurvePoint, CurvePoint]:
    p = fam.params
    if Q.is_infinity:
        return INFINITY, CurvePoint(0j, 0j)
    k2_ = p.k1 ** 2
    xs = np.roots([k2_, -(k2_ * (1 + p.alpha ** 2) + Q.x), k2_ * p.alpha ** 2])
    return tuple(CurvePoint(complex(x), complex(Q.y * x ** 2 / p.k1 ** 3)) for x in xs)


def phi2_preimages(fam: BiellipticFamily, Q: CurvePoint) -> tuple[CurvePoint, CurvePoint]:
    p = fam.params
    al = p.alpha
    if Q.is_infinity:
        raise AtPole("preimages of infinity on C lie over x = alpha")
    s = np.sqrt(complex(Q.x))
    if abs(s - 1) < 1e-14 or abs(s + 1) < 1e-14:
        return INFINITY, CurvePoint(0j, 0j)
    out = []
    for r in (s, -s):
        x = al * (r + 1) / (r - 1)
        y = Q.y * (x - al) ** 5 / (4 * al * p.k2 * (x + al))
        out.append(CurvePoint(complex(x), complex(y)))
    return tuple(out)


def involution_partner_phi1(fam: BiellipticFamily, P: CurvePoint) -> CurvePoint:
    """Q = (alpha^2/x, alpha^4 y / x^4), the other point in the phi1-fibre of P."""
    al2 = fam.params.alpha ** 2
    return CurvePoint(al2 / P.x, al2 ** 2 * P.y / P.x ** 4)


def involution_partner_phi2(fam: BiellipticFamily, P: CurvePoint) -> CurvePoint:
    """R = (alpha^2/x, -alpha^4 y / x^4), the other point in the phi2-fibre of P."""
    al2 = fam.params.alpha ** 2
    return CurvePoint(al2 / P.x, -al2 ** 2 * P.y / P.x ** 4)


def zeta_tilde(fam: BiellipticFamily, P: CurvePoint) -> tuple[complex, complex]:
    """V -> H, (x, y) -> ((x + alpha)/(x - alpha), 4 alpha k2 y / (x - alpha)^4)."""
    p = fam.params
    if P.is_infinity or P.x == p.alpha:
        raise AtPole("zeta_tilde is not finite at infinity or x = alpha")
    d = P.x - p.alpha
    return complex((P.x + p.alpha) / d), complex(4 * p.alpha * p.k2 * P.y / d ** 4)


def zeta_sqrt_branch(fam: BiellipticFamily) -> complex:
    """The square root of (1 - b^2)(c^2 - 1) used by zeta; chosen as k2 (1 - alpha) so zeta inverts zeta_tilde."""
    p = fam.params
    return complex(p.k2 * (1 - p.alpha))


def zeta(fam: BiellipticFamily, st: tuple[complex, complex]) -> CurvePoint:
    """H -> V."""
    s, t = st
    p = fam.params
    if s == 1:
        raise AtPole("zeta has a pole at s = 1")
    a = p.a
    x = (a - 1) * (s + 1) / ((a + 1) * (s - 1))
    y = 8 * (a - 1) ** 3 * t / ((a + 1) ** 4 * zeta_sqrt_branch(fam) * (s - 1) ** 4)
    return CurvePoint(complex(x), complex(y))


def phibar1(st):
    """H -> W, (s, t) -> (s^2, t)."""
    s, t = st
    return s * s, t


def phibar2(st) -> CurvePoint:
    """H -> C, (s, t) -> (s^2, s t)."""
    s, t = st
    return CurvePoint(s * s, s * t)


def xi(fam: BiellipticFamily, ST) -> CurvePoint:
    """W -> E."""
    S, T = ST
    p = fam.params
    if S == 1:
        raise AtPole("xi has a pole at S = 1")
    al = p.alpha
    X = p.k1 ** 2 * ((al + 1) ** 2 - (al - 1) ** 2 * S) / (S - 1)
    Y = 4 * al * p.k1 ** 3 * T / (p.k2 * (S - 1) ** 2)
    return CurvePoint(complex(X), complex(Y))


def even_model_residual(roots: np.ndarray, s, t) -> float:
    F = np.prod(s - roots)
    return float(abs(t * t - F) / (1 + abs(F)))


# pullbacks ----------------------------------------------------------------

def _tangent(curve: CurveSpec, P: CurvePoint) -> tuple[Dual, Dual]:
    return Dual(P.x, 1.0), Dual(P.y, curve.dN(P.x) / (2 * P.y))


def pullback_residual(fam: BiellipticFamily, n_points: int = 100, rng: np.random.Generator | None = None,
                      K1: np.ndarray | None = None, K2: np.ndarray | None = None) -> dict:
    """Max relative mismatch between pulled-back differentials of E, C and the K-combinations on V.

    phi1^* omega_E must equal K1 . (omega_1, omega_3, omega_5) and
    phi2^* (omega_1^C, omega_3^C) must equal the two rows of K2, as dx-coefficients.
    """
    rng = rng or np.random.default_rng(0)
    K1 = fam.matrices.K1 if K1 is None else np.asarray(K1)
    K2 = fam.matrices.K2 if K2 is None else np.asarray(K2)
    V = fam.curves.V
    p = fam.params
    worst1 = worst2 = 0.0
    for P in random_points(V, n_points, rng):
        if abs(P.x - p.alpha) < 1e-6 or abs(P.x) < 1e-6:
            continue
        w = np.array([differential_first_kind(V, i, P) for i in (1, 2, 3)])
        x, y = _tangent(V, P)
        X, Y = _phi1_xy(p, x, y)
        lhs = -X.d / (2 * Y.v)
        rhs = K1[0] @ w
        worst1 = max(worst1, abs(lhs - rhs) / max(abs(lhs), abs(rhs)))
        X, Y = _phi2_xy(p, x, y)
        lhs = np.array([-X.v * X.d / (2 * Y.v), -X.d / (2 * Y.v)])
        rhs = K2 @ w
        worst2 = max(worst2, float(np.max(np.abs(lhs - rhs) / np.maximum(np.abs(lhs), np.abs(rhs)))))
    return {"phi1": worst1, "phi2": worst2, "max": max(worst1, worst2)}
