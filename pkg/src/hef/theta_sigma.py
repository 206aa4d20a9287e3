"""Riemann theta with half-integer characteristics, the sigma function and Kleinian p-functions.

The theta series is summed over the lattice points inside the ellipsoid

    (n + d' - c)^T Im(tau) (n + d' - c) <= R^2,   c = -Im(tau)^{-1} Im(z),

centred on the dominant term, so every dropped term is smaller than the largest
retained one by at least exp(-pi R^2). Derivatives are taken term by term.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

from .errors import OnThetaDivisor, TauNotPositive
from .lattice import reduce_mod_lattice

DEFAULT_THETA_TOL = 1e-12
DIVISOR_TOL = 1e-10


def radius_for_tolerance(tol: float) -> float:
    # extra 10 in the exponent covers the lattice-point count and derivative weights
    return math.sqrt((-math.log(tol) + 10.0) / math.pi)


DEFAULT_RADIUS = radius_for_tolerance(DEFAULT_THETA_TOL)


def _check_tau(tau: np.ndarray) -> np.ndarray:
    tau = np.atleast_2d(np.asarray(tau, dtype=complex))
    Y = 0.5 * (tau.imag + tau.imag.T)
    try:
        np.linalg.cholesky(Y)
    except np.linalg.LinAlgError:
        raise TauNotPositive(f"Im(tau) is not positive definite: eigenvalues {np.linalg.eigvalsh(Y)}") from None
    return 0.5 * (tau + tau.T)


def lattice_points(Y: np.ndarray, center: np.ndarray, radius: float) -> np.ndarray:
    """Integer vectors n with (n - center)^T Y (n - center) <= radius^2."""
    Yinv = np.linalg.inv(Y)
    half = radius * np.sqrt(np.diag(Yinv))
    axes = [np.arange(math.ceil(c - h), math.floor(c + h) + 1) for c, h in zip(center, half)]
    grid = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(center))
    d = grid - center
    q = np.einsum("ni,ij,nj->n", d, Y, d)
    return grid[q <= radius * radius]


def _terms(z, tau, d1, d2, radius):
    """Characteristic-shifted lattice vectors v = n + d' and exponents of each series term."""
    Y = tau.imag
    center = -np.linalg.solve(Y, z.imag) - d1
    v = lattice_points(Y, center, radius) + d1
    quad = np.einsum("ni,ij,nj->n", v, tau, v)
    E = 1j * np.pi * quad + 2j * np.pi * (v @ (z + d2))
    return v, E


def theta(char, z, tau, deriv: Sequence[int] = (), radius: float | None = None) -> complex:
    """theta[d'; d''](z, tau) or its partial derivative d/dz_a d/dz_b ... for ``deriv = (a, b, ...)``."""
    tau = _check_tau(tau)
    g = tau.shape[0]
    d1 = np.asarray(char[0], dtype=float).reshape(g)
    d2 = np.asarray(char[1], dtype=float).reshape(g)
    z = np.asarray(z, dtype=complex).reshape(g)
    v, E = _terms(z, tau, d1, d2, DEFAULT_RADIUS if radius is None else radius)
    M = E.real.max()
    t = np.exp(E - M)
    for a in deriv:
        t = t * (2j * np.pi * v[:, a])
    return complex(np.exp(M) * t.sum())


class SigmaEvaluator:
    """sigma and the p-functions of one curve, bound to its period data.

    Indices of p-functions use the odd labels 1, 3, ..., 2g-1.
    """

    def __init__(self, curve, periods, epsilon: complex = 1.0, trunc_radius: float | None = None,
                 divisor_tol: float = DIVISOR_TOL):
        self.curve = curve
        self.periods = periods
        self.epsilon = complex(epsilon)
        self.trunc_radius = DEFAULT_RADIUS if trunc_radius is None else float(trunc_radius)
        self.divisor_tol = divisor_tol
        self.genus = periods.omega1.shape[0]
        self.tau = _check_tau(periods.tau)
        self.W = np.linalg.inv(2 * periods.omega1)
        H = periods.eta1 @ np.linalg.inv(periods.omega1)
        self.H = 0.5 * (H + H.T)
        self.d1 = np.asarray(periods.char_delta1, dtype=float)
        self.d2 = np.asarray(periods.char_delta2, dtype=float)

    def _vec(self, u) -> np.ndarray:
        return np.asarray(u, dtype=complex).reshape(self.genus)

    def _jet(self, u, order: int):
        """Scaled sums S_k = sum_n t_n kappa_n^(x k), kappa_n = 2 pi i W^T v_n, plus the scale exponent."""
        z = self.W @ u
        v, E = _terms(z, self.tau, self.d1, self.d2, self.trunc_radius)
        M = E.real.max()
        t = np.exp(E - M)
        out = [M, t.sum(), np.abs(t).sum()]
        if order >= 1:
            kappa = 2j * np.pi * (v @ self.W)
            out.append(kappa.T @ t)
        if order >= 2:
            out.append(np.einsum("n,ni,nj->ij", t, kappa, kappa))
        if order >= 3:
            out.append(np.einsum("n,ni,nj,nk->ijk", t, kappa, kappa, kappa))
        return out

    def log_sigma(self, u) -> complex:
        u = self._vec(u)
        M, S0, _ = self._jet(u, 0)
        return complex(np.log(self.epsilon) + 0.5 * u @ self.H @ u + M + np.log(S0))

    def sigma(self, u) -> complex:
        return complex(np.exp(self.log_sigma(u)))

    def theta_ratio(self, u) -> float:
        """|theta| relative to the sum of term magnitudes at the lattice-reduced point."""
        rep, _, _ = reduce_mod_lattice(self._vec(u), self.periods.omega1, self.periods.omega2)
        _, S0, scale = self._jet(rep, 0)
        return float(abs(S0) / scale)

    def wp_tensors(self, u) -> tuple[np.ndarray, np.ndarray]:
        """Matrix p_ij and tensor p_ijk at u (0-based array indices)."""
        rep, _, _ = reduce_mod_lattice(self._vec(u), self.periods.omega1, self.periods.omega2)
        M, S0, scale, S1, S2, S3 = self._jet(rep, 3)
        if abs(S0) < self.divisor_tol * scale:
            raise OnThetaDivisor(f"|theta| / scale = {abs(S0) / scale:.3e} at u = {u}")
        a = S1 / S0
        A2 = S2 / S0
        L2 = A2 - np.outer(a, a)
        L3 = (S3 / S0
              - np.einsum("ij,k->ijk", A2, a) - np.einsum("ik,j->ijk", A2, a) - np.einsum("jk,i->ijk", A2, a)
              + 2 * np.einsum("i,j,k->ijk", a, a, a))
        return -self.H - L2, -L3

    def wp(self, i: int, j: int, u) -> complex:
        P2, _ = self.wp_tensors(u)
        return complex(P2[(i - 1) // 2, (j - 1) // 2])

    def wp3(self, i: int, j: int, k: int, u) -> complex:
        _, P3 = self.wp_tensors(u)
        return complex(P3[(i - 1) // 2, (j - 1) // 2, (k - 1) // 2])

    def basic_functions(self, u) -> tuple[np.ndarray, np.ndarray]:
        """(p_(1,i))_i and (p_(1,1,i))_i for i = 1, 3, ..., 2g-1."""
        P2, P3 = self.wp_tensors(u)
        return P2[0].copy(), P3[0, 0].copy()
