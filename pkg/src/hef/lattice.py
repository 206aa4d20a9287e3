"""Coordinates of vectors with respect to the period lattice 2w'Z^g + 2w''Z^g."""

from __future__ import annotations

import numpy as np


def lattice_coordinates(u, omega1: np.ndarray, omega2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Real vectors (s, t) with u = 2 omega1 s + 2 omega2 t."""
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    basis = np.hstack([2 * omega1, 2 * omega2])
    real_basis = np.vstack([basis.real, basis.imag])
    st = np.linalg.solve(real_basis, np.concatenate([u.real, u.imag]))
    g = len(u)
    return st[:g], st[g:]


def reduce_mod_lattice(u, omega1: np.ndarray, omega2: np.ndarray):
    """Fold u into the parallelotope with lattice coordinates in [-1/2, 1/2).

    Returns ``(rep, m1, m2)`` with ``u = rep + 2 omega1 m1 + 2 omega2 m2``.
    """
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    s, t = lattice_coordinates(u, omega1, omega2)
    m1 = np.floor(s + 0.5).astype(int)
    m2 = np.floor(t + 0.5).astype(int)
    rep = u - 2 * omega1 @ m1 - 2 * omega2 @ m2
    return rep, m1, m2


def lattice_distance(u, omega1: np.ndarray, omega2: np.ndarray) -> float:
    """Max distance of the lattice coordinates of u from the nearest integers."""
    s, t = lattice_coordinates(u, omega1, omega2)
    st = np.concatenate([s, t])
    return float(np.max(np.abs(st - np.round(st))))


def lattice_residual(u, omega1: np.ndarray, omega2: np.ndarray) -> float:
    """Euclidean distance from u to the nearest lattice vector (nearest in lattice coordinates)."""
    u = np.atleast_1d(np.asarray(u, dtype=complex))
    s, t = lattice_coordinates(u, omega1, omega2)
    near = 2 * omega1 @ np.round(s) + 2 * omega2 @ np.round(t)
    return float(np.linalg.norm(u - near))
