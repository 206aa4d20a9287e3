"""Hyperelliptic curves y^2 = N(x) with N monic of degree 2g+1.

Coefficients follow the weighted convention

    N(x) = x^(2g+1) + lam_2 x^(2g) + lam_4 x^(2g-1) + ... + lam_(4g+2)

so a curve of genus g carries exactly 2g+1 coefficients after the implicit
leading lam_0 = 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import AtBranchPoint, AtInfinity, BadArity, MultipleRoots, NotFamilyCurve

MAX_GENUS = 3
ROOT_SEPARATION = 1e-8


def _polish(poly: np.ndarray, roots: np.ndarray) -> np.ndarray:
    dpoly = np.polyder(poly)
    d = np.polyval(dpoly, roots)
    safe = np.abs(d) > 0
    step = np.zeros_like(roots)
    step[safe] = np.polyval(poly, roots[safe]) / d[safe]
    return roots - step


def polynomial_roots(poly: Sequence[complex]) -> np.ndarray:
    """Roots of a polynomial (highest degree first): companion eigenvalues plus one Newton step."""
    poly = np.asarray(poly, dtype=complex)
    return _polish(poly, np.roots(poly).astype(complex))


def min_root_separation(roots: np.ndarray) -> float:
    diff = np.abs(roots[:, None] - roots[None, :])
    diff[np.diag_indices(len(roots))] = np.inf
    return float(diff.min())


@dataclass(frozen=True)
class CurvePoint:
    """A point of a hyperelliptic curve; ``x is None`` encodes the point at infinity."""

    x: complex | None
    y: complex | None = None

    @classmethod
    def infinity(cls) -> "CurvePoint":
        return cls(None, None)

    @property
    def is_infinity(self) -> bool:
        return self.x is None

    def involution(self) -> "CurvePoint":
        if self.is_infinity:
            return self
        return CurvePoint(self.x, -self.y)

    def __repr__(self) -> str:
        if self.is_infinity:
            return "CurvePoint(infinity)"
        return f"CurvePoint(x={self.x!r}, y={self.y!r})"


INFINITY = CurvePoint.infinity()


@dataclass(frozen=True)
class CurveSpec:
    genus: int
    coefficients: tuple[complex, ...]
    roots: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        g = self.genus
        if not isinstance(g, (int, np.integer)) or not 1 <= g <= MAX_GENUS:
            raise BadArity(f"genus must be an integer in 1..{MAX_GENUS}, got {g!r}")
        coeffs = tuple(complex(c) for c in self.coefficients)
        if len(coeffs) != 2 * g + 1:
            raise BadArity(f"genus {g} needs {2 * g + 1} coefficients, got {len(coeffs)}")
        object.__setattr__(self, "coefficients", coeffs)
        roots = polynomial_roots(self.poly)
        scale = 1.0 + float(np.max(np.abs(roots)))
        if min_root_separation(roots) < ROOT_SEPARATION * scale:
            raise MultipleRoots(f"N(x) has (nearly) repeated roots: {roots}")
        roots.setflags(write=False)
        object.__setattr__(self, "roots", roots)

    @property
    def degree(self) -> int:
        return 2 * self.genus + 1

    @property
    def poly(self) -> np.ndarray:
        """Coefficients of N, highest degree first."""
        return np.array((1.0,) + self.coefficients, dtype=complex)

    @property
    def lam(self) -> np.ndarray:
        """lam[m] is the weighted coefficient lam_(2m), with lam[0] = 1."""
        return self.poly

    @property
    def scale(self) -> float:
        return 1.0 + float(np.max(np.abs(self.roots)))

    def N(self, x):
        return np.polyval(self.poly, x)

    def dN(self, x):
        return np.polyval(np.polyder(self.poly), x)

    def contains(self, P: CurvePoint, tol: float = 1e-10) -> bool:
        if P.is_infinity:
            return True
        n = self.N(P.x)
        return abs(P.y * P.y - n) <= tol * (1.0 + abs(n))

    def lift(self, x: complex, sign: int = 1) -> CurvePoint:
        """Point above x with y = sign * principal sqrt(N(x))."""
        x = complex(x)
        return CurvePoint(x, sign * complex(np.sqrt(complex(self.N(x)))))

    def branch_index(self, P: CurvePoint, tol: float = 1e-12) -> int | None:
        """Index into ``roots`` if P is (numerically) a finite branch point."""
        if P.is_infinity:
            return None
        d = np.abs(self.roots - P.x)
        k = int(np.argmin(d))
        return k if d[k] <= tol * self.scale else None

    # Numerators of the differentials, written as omega = -num(x) dx / (2y).
    # Arrays are in ascending powers of x.
    def first_kind_numerators(self) -> list[np.ndarray]:
        g = self.genus
        out = []
        for i in range(1, g + 1):
            c = np.zeros(2 * g, dtype=complex)
            c[g - i] = 1.0
            out.append(c)
        return out

    def second_kind_numerators(self) -> list[np.ndarray]:
        g = self.genus
        lam = self.lam
        out = []
        for i in range(1, g + 1):
            c = np.zeros(2 * g, dtype=complex)
            for k in range(g - i + 1, g + i):
                c[k] = (k + i - g) * lam[g + i - k - 1]
            out.append(c)
        return out


def curve_from_coefficients(genus: int, coefficients: Sequence[complex]) -> CurveSpec:
    return CurveSpec(int(genus), tuple(coefficients))


def curve_from_roots(roots: Sequence[complex]) -> CurveSpec:
    roots = np.asarray(roots, dtype=complex)
    n = len(roots)
    if n % 2 == 0 or n < 3:
        raise BadArity(f"need an odd number (>= 3) of roots, got {n}")
    scale = 1.0 + float(np.max(np.abs(roots)))
    if min_root_separation(roots) < ROOT_SEPARATION * scale:
        raise MultipleRoots(f"coincident roots: {roots}")
    poly = np.poly(roots).astype(complex)
    return CurveSpec((n - 1) // 2, tuple(poly[1:]))


def _check_point(curve: CurveSpec, P: CurvePoint):
    if P.is_infinity:
        raise AtInfinity("differential value requested at infinity")
    if abs(P.y) <= 1e-14 * curve.scale:
        raise AtBranchPoint(f"y = 0 at x = {P.x}")


def differential_first_kind(curve: CurveSpec, i: int, P: CurvePoint) -> complex:
    """dx-coefficient of omega_(2i-1) = -x^(g-i) dx / (2y) at P."""
    _check_point(curve, P)
    return -(P.x ** (curve.genus - i)) / (2 * P.y)


def differential_second_kind(curve: CurveSpec, i: int, P: CurvePoint) -> complex:
    _check_point(curve, P)
    num = curve.second_kind_numerators()[i - 1]
    return -np.polynomial.polynomial.polyval(P.x, num) / (2 * P.y)


def mu_coefficients(V: CurveSpec, tol: float = 1e-12) -> tuple[complex, ...]:
    """(mu_0, mu_2, ..., mu_12) with f(x) = mu_0 x^7 + ... + mu_12 x for a genus-3 curve through (0, 0)."""
    if V.genus != 3:
        raise NotFamilyCurve(f"expected genus 3, got {V.genus}")
    c = V.poly
    if abs(c[-1]) > tol * float(np.max(np.abs(c))):
        raise NotFamilyCurve(f"constant term {c[-1]} is not zero")
    return tuple(complex(v) for v in c[:-1])


# JSON helpers -----------------------------------------------------------

def cpair(z) -> list[float]:
    z = complex(z)
    return [float(z.real), float(z.imag)]


def from_cpair(p) -> complex:
    if isinstance(p, (int, float, complex)):
        return complex(p)
    return complex(float(p[0]), float(p[1]))


def curve_to_json(curve: CurveSpec) -> dict:
    return {"genus": curve.genus, "lambda": [cpair(c) for c in curve.coefficients]}


def curve_from_json(obj: dict) -> CurveSpec:
    return curve_from_coefficients(obj["genus"], [from_cpair(p) for p in obj["lambda"]])


def point_to_json(P: CurvePoint):
    if P.is_infinity:
        return "infinity"
    return {"x": cpair(P.x), "y": cpair(P.y)}


def point_from_json(obj) -> CurvePoint:
    if obj == "infinity":
        return INFINITY
    return CurvePoint(from_cpair(obj["x"]), from_cpair(obj["y"]))


def random_points(curve: CurveSpec, n: int, rng: np.random.Generator, radius: float | None = None,
                  min_gap: float = 0.02) -> list[CurvePoint]:
    """Random affine points with x in a box around the branch points, kept away from them."""
    center = np.mean(curve.roots)
    radius = radius or float(np.max(np.abs(curve.roots - center))) + 0.5
    out = []
    while len(out) < n:
        x = center + radius * complex(rng.uniform(-1, 1), rng.uniform(-1, 1))
        if np.min(np.abs(curve.roots - x)) < min_gap * radius:
            continue
        out.append(curve.lift(x, int(rng.choice([-1, 1]))))
    return out
