import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hef.curves import curve_from_roots, random_points
from hef.errors import OnThetaDivisor, TauNotPositive
from hef.lattice import lattice_residual
from hef.reduction import curve_tools
from hef.theta_sigma import DEFAULT_RADIUS, SigmaEvaluator, lattice_points, theta
from hef.verify import quasi_periodicity_residual


def _sample_u(tools, rng, n):
    g = tools.periods.genus
    return [tools.abel.divisor(random_points(tools.abel.curve, g, rng)) for _ in range(n)]


def test_odd_theta_vanishes_at_zero():
    assert abs(theta(([0.5], [0.5]), [0.0], [[1j]])) < 1e-14


def test_theta_integer_shift_invariance():
    tau = np.array([[1.1j + 0.2, 0.3], [0.3, 0.9j - 0.1]])
    z = np.array([0.13 - 0.2j, -0.4 + 0.05j])
    base = theta(([0, 0], [0, 0]), z, tau)
    for k in range(2):
        e = np.zeros(2)
        e[k] = 1
        assert theta(([0, 0], [0, 0]), z + e, tau) == pytest.approx(base, rel=1e-13)


def test_theta_matches_brute_force_sum():
    n = np.arange(-40, 41)
    brute = np.sum(np.exp(1j * np.pi * n ** 2 * 1j))
    assert theta(([0], [0]), [0.0], [[1j]]) == pytest.approx(brute, rel=1e-13)
    assert theta(([0], [0]), [0.0], [[1j]], radius=2 * DEFAULT_RADIUS) == pytest.approx(brute, rel=1e-13)


def test_theta_derivative_against_difference():
    tau = np.array([[1.3j]])
    z0, h = 0.21 + 0.1j, 1e-5
    fd = (theta(([0.5], [0]), [z0 + h], tau) - theta(([0.5], [0]), [z0 - h], tau)) / (2 * h)
    assert theta(([0.5], [0]), [z0], tau, deriv=(0,)) == pytest.approx(fd, rel=1e-8)


def test_tau_must_have_positive_imaginary_part():
    with pytest.raises(TauNotPositive):
        theta(([0], [0]), [0.0], [[-1j]])


def test_lattice_points_inside_ellipsoid():
    Y = np.array([[2.0, 0.3], [0.3, 1.0]])
    pts = lattice_points(Y, np.array([0.2, -0.1]), 2.0)
    d = pts - np.array([0.2, -0.1])
    assert np.all(np.einsum("ni,ij,nj->n", d, Y, d) <= 4.0)
    assert len(pts) > 5


def test_genus1_ode(rng):
    # y^2 = x (x - 1)(x - 2): p'^2 = 4 p (p - 1)(p - 2)
    tools = curve_tools(curve_from_roots([0, 1, 2]))
    for u in _sample_u(tools, rng, 20):
        P2, P3 = tools.sigma.wp_tensors(u)
        wp, wpp = P2[0, 0], P3[0, 0, 0]
        assert abs(wpp ** 2 - 4 * wp * (wp - 1) * (wp - 2)) <= 1e-8 * max(1, abs(wpp) ** 2)


@pytest.mark.parametrize("name", ["E", "C", "V"])
def test_sigma_parity_sign_is_constant(ctx, rng, name):
    tools = getattr(ctx, name)
    signs = set()
    for u in _sample_u(tools, rng, 50):
        ratio = tools.sigma.sigma(-u) / tools.sigma.sigma(u)
        assert abs(abs(ratio) - 1) < 1e-9
        signs.add(int(np.sign(ratio.real)))
    assert len(signs) == 1


@pytest.mark.parametrize("name", ["E", "C", "V"])
def test_quasi_periodicity_spot_check(ctx, rng, name):
    tools = getattr(ctx, name)
    g = tools.periods.genus
    for u in _sample_u(tools, rng, 3):
        for m in rng.integers(-1, 2, size=(5, 2 * g)):
            assert quasi_periodicity_residual(tools, u, m[:g], m[g:]) < 1e-8


@pytest.mark.parametrize("name", ["E", "C", "V"])
def test_wp_lattice_periodicity_and_symmetry(ctx, rng, name):
    tools = getattr(ctx, name)
    p = tools.periods
    g = p.genus
    for u in _sample_u(tools, rng, 5):
        P2, P3 = tools.sigma.wp_tensors(u)
        assert np.allclose(P2, P2.T, rtol=1e-12, atol=1e-12)
        m1, m2 = rng.integers(-2, 3, size=g), rng.integers(-2, 3, size=g)
        Q2, Q3 = tools.sigma.wp_tensors(u + 2 * p.omega1 @ m1 + 2 * p.omega2 @ m2)
        assert np.max(np.abs(Q2 - P2)) <= 1e-8 * max(1, np.abs(P2).max())
        assert np.max(np.abs(Q3 - P3)) <= 1e-8 * max(1, np.abs(P3).max())


@pytest.mark.parametrize("name", ["E", "C", "V"])
def test_wp_parity(ctx, rng, name):
    tools = getattr(ctx, name)
    for u in _sample_u(tools, rng, 5):
        P2, P3 = tools.sigma.wp_tensors(u)
        M2, M3 = tools.sigma.wp_tensors(-u)
        assert np.max(np.abs(M2 - P2)) <= 1e-9 * max(1, np.abs(P2).max())
        assert np.max(np.abs(M3 + P3)) <= 1e-9 * max(1, np.abs(P3).max())


@pytest.mark.parametrize("name", ["E", "C", "V"])
def test_wp3_matches_finite_differences(ctx, rng, name):
    tools = getattr(ctx, name)
    g = tools.periods.genus
    h = 1e-5
    for u in _sample_u(tools, rng, 20):
        _, P3 = tools.sigma.wp_tensors(u)
        for k in range(g):
            e = np.zeros(g, dtype=complex)
            e[k] = h
            f = lambda j: tools.sigma.wp_tensors(u + j * e)[0]
            # fourth-order stencil: samples can sit close to the theta divisor
            fd = (8 * (f(1) - f(-1)) - (f(2) - f(-2))) / (12 * h)
            assert np.max(np.abs(fd - P3[:, :, k])) <= 1e-5 * max(1, np.abs(P3).max())


def test_wp_independent_of_epsilon(ctx, rng):
    tools = ctx.C
    doubled = SigmaEvaluator(ctx.family.curves.C, tools.periods, epsilon=2.0)
    for u in _sample_u(tools, rng, 5):
        a, b = tools.sigma.wp_tensors(u), doubled.wp_tensors(u)
        assert np.max(np.abs(a[0] - b[0])) <= 1e-14 * max(1, np.abs(a[0]).max())
        assert doubled.sigma(u) == pytest.approx(2 * tools.sigma.sigma(u), rel=1e-13)


def test_truncation_radius_is_sufficient(ctx, rng):
    tools = ctx.V
    wide = SigmaEvaluator(ctx.family.curves.V, tools.periods, trunc_radius=2 * DEFAULT_RADIUS)
    for u in _sample_u(tools, rng, 5):
        assert wide.sigma(u) == pytest.approx(tools.sigma.sigma(u), rel=1e-12)


def test_pole_is_reported(ctx):
    with pytest.raises(OnThetaDivisor):
        ctx.E.sigma.wp_tensors([0.0])
    p = ctx.E.periods
    with pytest.raises(OnThetaDivisor):
        ctx.E.sigma.wp_tensors(2 * p.omega1[0] + 2 * p.omega2[0])


def test_odd_label_accessors(ctx):
    u = np.array([0.1 + 0.2j, -0.3 + 0.1j])
    P2, P3 = ctx.C.sigma.wp_tensors(u)
    assert ctx.C.sigma.wp(1, 3, u) == P2[0, 1]
    assert ctx.C.sigma.wp3(1, 1, 3, u) == P3[0, 0, 1]


_GENUS1: dict = {}


@settings(max_examples=25, deadline=None)
@given(st.floats(-0.45, 0.45), st.floats(-0.45, 0.45))
def test_genus1_inversion_property(s, t):
    """p(u) is the x-coordinate of the point whose Abel image is u."""
    if "tools" not in _GENUS1:
        _GENUS1["tools"] = curve_tools(curve_from_roots([-1, 0, 1]))
    tools = _GENUS1["tools"]
    p = tools.periods
    u = 2 * p.omega1[0] * s + 2 * p.omega2[0] * t
    if abs(u[0]) < 1e-2:
        return
    P2, P3 = tools.sigma.wp_tensors(u)
    x, y = P2[0, 0], -P3[0, 0, 0] / 2
    P = tools.abel.curve.lift(x, 1)
    if abs(P.y - y) > abs(P.y + y):
        P = P.involution()
    assert lattice_residual(tools.abel(P) - u, p.omega1, p.omega2) < 1e-8

