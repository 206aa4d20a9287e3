"""Abel-Jacobi maps and the Jacobi-inversion residual check."""

from __future__ import annotations

import numpy as np

from .curves import INFINITY, CurvePoint, CurveSpec
from .errors import DegenerateConfiguration, PathThroughBranchPoint, QuadratureNoConvergence
from .lattice import lattice_residual, reduce_mod_lattice
from .periods import N_MAX, N_START, PeriodData, _sqrt_ratio_product

__all__ = ["AbelMap", "reduce_mod_lattice", "lattice_residual", "inversion_residual",
           "jacobi_inversion_residual"]

MIN_CLEARANCE = 1e-6


def _clearance(a: complex, b: complex, others: np.ndarray) -> float:
    """Smallest distance from a branch point in ``others`` to the segment [a, b], relative to its length."""
    d = b - a
    L = abs(d)
    if len(others) == 0:
        return np.inf
    t = np.clip(((others - a) * np.conj(d)).real / (L * L), 0.0, 1.0)
    return float(np.min(np.abs(others - (a + t * d))) / L)


class AbelMap:
    """P -> integral of omega from ``base`` to P, as a vector in C^g (meaningful modulo the lattice).

    The path starts at the point at infinity, runs to a branch point e through the chain of
    segments and a ray, then along the straight segment from e to x(P), with y continued
    back from the stored y(P). The starting branch point is the one whose segment keeps
    the most room from the other branch points.
    """

    def __init__(self, curve: CurveSpec, periods: PeriodData, base: CurvePoint = INFINITY,
                 tol: float | None = None):
        self.curve = curve
        self.periods = periods
        self.tol = periods.quad_tol if tol is None else tol
        self.e = periods.basis.branch_points
        self.base = base
        self._offset = np.zeros(curve.genus, dtype=complex)
        if not base.is_infinity:
            if not curve.contains(base):
                raise ValueError(f"base point {base} is not on the curve")
            self._offset = self.from_infinity(base)

    def __call__(self, P: CurvePoint, start: int | None = None) -> np.ndarray:
        return self.from_infinity(P, start) - self._offset

    def start_candidates(self, x: complex) -> list[int]:
        """Branch-point indices ordered by decreasing clearance of the segment to x."""
        scores = []
        for k, ek in enumerate(self.e):
            scores.append(_clearance(ek, x, np.delete(self.e, k)))
        return list(np.argsort(scores)[::-1])

    def from_infinity(self, P: CurvePoint, start: int | None = None) -> np.ndarray:
        g = self.curve.genus
        if P.is_infinity:
            return np.zeros(g, dtype=complex)
        d = np.abs(self.e - P.x)
        k_near = int(np.argmin(d))
        if d[k_near] <= 1e-13 * self.curve.scale:
            return self.periods.branch_abel[k_near].copy()
        k = self.start_candidates(P.x)[0] if start is None else start
        if _clearance(self.e[k], P.x, np.delete(self.e, k)) < MIN_CLEARANCE:
            raise PathThroughBranchPoint(f"segment from e_{k} to {P.x} touches another branch point")
        return self.periods.branch_abel[k] + self._from_branch(k, P)

    def _from_branch(self, k: int, P: CurvePoint) -> np.ndarray:
        ek = self.e[k]
        others = np.delete(self.e, k)
        xp, yp = complex(P.x), complex(P.y)
        nums = self.curve.first_kind_numerators()

        def quad(n):
            # x = e + (x_P - e) s^2; the sqrt factor of y at e becomes s and cancels dx/ds
            s, w = np.polynomial.legendre.leggauss(n)
            s, w = 0.5 * (s + 1), 0.5 * w
            x = ek + (xp - ek) * s * s
            Q = _sqrt_ratio_product(x, others, xp)
            vals = np.array([np.polynomial.polynomial.polyval(x, c) for c in nums])
            return np.sum(w * (-vals * (xp - ek) / (yp * Q)), axis=1)

        n = N_START
        prev = quad(n)
        while n < N_MAX:
            n *= 2
            cur = quad(n)
            if np.max(np.abs(cur - prev)) <= self.tol * max(np.max(np.abs(cur)), 1e-300):
                return cur
            prev = cur
        raise QuadratureNoConvergence(f"Abel integral from e_{k} to {xp}")

    def divisor(self, points) -> np.ndarray:
        return sum((self(P) for P in points), np.zeros(self.curve.genus, dtype=complex))


def inversion_residual(ev, points, u) -> dict:
    """Residuals of the Jacobi-inversion identities for g affine points summing to u.

    With e_1, e_2, ... the elementary symmetric functions of the x_i:
    p_(1,2j-1)(u) = (-1)^(j+1) e_j, and 2 y_i = -sum_j x_i^(g-j) p_(1,1,2j-1)(u).
    """
    g = ev.genus
    xs = np.array([P.x for P in points], dtype=complex)
    ys = np.array([P.y for P in points], dtype=complex)
    if len(points) != g:
        raise DegenerateConfiguration(f"need {g} points, got {len(points)}")
    gaps = np.abs(xs[:, None] - xs[None, :])[~np.eye(g, dtype=bool)]
    if g > 1 and gaps.min() < 1e-10:
        raise DegenerateConfiguration("repeated x-coordinates")
    p1, p11 = ev.basic_functions(u)
    # monic polynomial prod (x - x_i) = x^g - p_(1,1) x^(g-1) - p_(1,3) x^(g-2) - ...
    poly = np.poly(xs)
    expected = -poly[1:]
    sym = np.abs(p1 - expected) / (1.0 + np.abs(expected))
    powers = xs[:, None] ** np.arange(g - 1, -1, -1)[None, :]
    rhs = -powers @ p11
    lin = np.abs(2 * ys - rhs) / (1.0 + np.abs(2 * ys))
    return {"symmetric": sym, "linear": lin, "max": float(max(sym.max(), lin.max()))}


def jacobi_inversion_residual(ev, abel: AbelMap, points) -> dict:
    for P in points:
        if P.is_infinity:
            raise DegenerateConfiguration("points must be affine")
    u = abel.divisor(points)
    return inversion_residual(ev, points, u)
