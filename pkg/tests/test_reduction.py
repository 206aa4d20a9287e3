import itertools

import numpy as np
import pytest

from hef.bielliptic import phi1_preimages, phi2_preimages
from hef.curves import CurvePoint, mu_coefficients, random_points
from hef.errors import DenominatorVanishes, HefError, InvalidInput, NearDegenerate
from hef.lattice import lattice_residual
from hef.reduction import (EllipticRestriction, Genus2Restriction, R_ratio, addition_build,
                           corollary_pipeline, corollary_point, genus2_closed_form, hk_oracle,
                           jacobi_points_C, relative_error, wp_add, wpV_on_L1, wpV_on_L2)


def _abel_C(ctx, rng):
    pts = random_points(ctx.family.curves.C, 2, rng)
    return ctx.C.abel.divisor(pts), pts


def _abel_E(ctx, rng):
    return complex(ctx.E.abel(random_points(ctx.family.curves.E, 1, rng)[0])[0])


def test_elliptic_restriction(ctx, rng):
    al2 = ctx.family.params.alpha ** 2
    for _ in range(20):
        u = _abel_E(ctx, rng)
        direct = ctx.direct_V(ctx.L1 * u)
        assert relative_error(wpV_on_L1(ctx, u), direct) < 1e-8
        # the constant entries hold on the nose
        assert abs(direct[1] + al2) < 1e-8
        assert np.max(np.abs(direct[[2, 4, 5]])) < 1e-8


def test_elliptic_ode(ctx, rng):
    er = EllipticRestriction(ctx.family, ctx.E.sigma)
    for _ in range(20):
        assert er.ode_residual(_abel_E(ctx, rng)) < 1e-8


def test_genus2_restriction_three_ways(ctx, rng):
    done = 0
    while done < 20:
        u, (P1, P2) = _abel_C(ctx, rng)
        try:
            closed = wpV_on_L2(ctx, u)
        except DenominatorVanishes:
            continue
        S = list(phi2_preimages(ctx.family, P1)) + list(phi2_preimages(ctx.family, P2))
        oracle = hk_oracle(ctx.family, S)
        direct = ctx.direct_V(ctx.L2 @ u)
        assert relative_error(closed, direct) < 1e-6
        assert relative_error(oracle, direct) < 1e-6
        assert relative_error(closed, oracle) < 1e-6
        done += 1


def test_jacobi_points_recovered(ctx, rng):
    u, pts = _abel_C(ctx, rng)
    recovered = jacobi_points_C(*Genus2Restriction(ctx.family, ctx.C.sigma).p_values(u))
    for P in pts:
        assert min(abs(P.x - Q.x) + abs(P.y - Q.y) for Q in recovered) < 1e-8


def test_isogeny_at_abel_level(ctx, rng):
    # L2 maps the Abel image on C to the sum over the phi2-fibres on V. For E the fibre over
    # infinity is {infinity, (0, 0)}, so the phi1-fibre sum carries the image of (0, 0).
    p = ctx.V.periods
    origin = ctx.V.abel(CurvePoint(0j, 0j))
    for _ in range(5):
        u, (P1, P2) = _abel_C(ctx, rng)
        S = list(phi2_preimages(ctx.family, P1)) + list(phi2_preimages(ctx.family, P2))
        assert lattice_residual(ctx.L2 @ u - ctx.V.abel.divisor(S), p.omega1, p.omega2) < 1e-8
        Q = random_points(ctx.family.curves.E, 1, rng)[0]
        T = list(phi1_preimages(ctx.family, Q))
        fibre = ctx.V.abel.divisor(T) - origin
        assert lattice_residual(ctx.L1 * ctx.E.abel(Q)[0] - fibre, p.omega1, p.omega2) < 1e-8


def test_first_closed_form_drops_h1_at_p4_minus_one(family):
    # p3 = p5 = 0 kills the leading fraction; p4 = -1 kills h1, leaving -mu2
    mu = mu_coefficients(family.curves.V)
    out = genus2_closed_form(family.params, mu, 0.7, 0.0, -1.0, 0.0)
    assert out[0] == pytest.approx(-mu[1], rel=1e-14)


@pytest.mark.parametrize("p2, p4, which", [(0.5, 0.0, "p4"), (0.3, 0.7, "1-p2-p4")])
def test_closed_form_guards(family, p2, p4, which):
    mu = mu_coefficients(family.curves.V)
    with pytest.raises(DenominatorVanishes) as info:
        genus2_closed_form(family.params, mu, p2, 0.1, p4, 0.2)
    assert which in str(info.value)
    assert isinstance(info.value, InvalidInput)


def test_oracle_is_symmetric(ctx, rng):
    u, (P1, P2) = _abel_C(ctx, rng)
    S = list(phi2_preimages(ctx.family, P1)) + list(phi2_preimages(ctx.family, P2))
    base = hk_oracle(ctx.family, S)
    for perm in itertools.permutations(range(4)):
        assert relative_error(hk_oracle(ctx.family, [S[i] for i in perm]), base) < 1e-12
    swapped = hk_oracle(ctx.family, S[2:] + S[:2])
    assert relative_error(swapped, base) < 1e-12


def _pair(ctx, rng):
    pts = random_points(ctx.family.curves.V, 6, rng)
    return ctx.V.abel.divisor(pts[:3]), ctx.V.abel.divisor(pts[3:])


def test_fitted_R_matches_determinant(ctx, rng):
    u, v = _pair(ctx, rng)
    schur = addition_build(ctx.direct_V(u), ctx.direct_V(v))
    sampled = addition_build(ctx.direct_V(u), ctx.direct_V(v), method="sampled")
    assert schur.xy_coefficient == pytest.approx(1, abs=1e-9)
    assert sampled.xy_coefficient == pytest.approx(1, abs=1e-9)
    for _ in range(10):
        x, y = complex(*rng.normal(size=2)), complex(*rng.normal(size=2))
        exact = R_ratio(schur, x, y)
        assert abs(schur.R(x, y) - exact) <= 1e-9 * max(1, abs(exact))
        assert abs(sampled.R(x, y) - exact) <= 1e-9 * max(1, abs(exact))


def test_R_vanishes_on_involuted_divisor_points(ctx, rng):
    # R(x, y) vanishes at the involutes of the points whose Abel sums are u and v
    V = ctx.family.curves.V
    pts = random_points(V, 6, rng)
    state = addition_build(ctx.direct_V(ctx.V.abel.divisor(pts[:3])), ctx.direct_V(ctx.V.abel.divisor(pts[3:])))
    scale = max(abs(c) for c in (state.d1, state.d2, state.d3, state.d5, state.d7, state.d9))
    for P in pts:
        Q = P.involution()
        assert abs(state.R(Q.x, Q.y)) <= 1e-7 * scale * max(1, abs(Q.x)) ** 4


def test_phi_is_norm_of_R(ctx, rng):
    V = ctx.family.curves.V
    u, v = _pair(ctx, rng)
    state = addition_build(ctx.direct_V(u), ctx.direct_V(v))
    Phi = state.Phi_coefficients(V.poly)
    for x in rng.normal(size=5) + 1j * rng.normal(size=5):
        y = np.sqrt(V.N(x))
        lhs = np.polyval(Phi, x)
        rhs = -state.R(x, y) * state.R(x, -y)
        assert abs(lhs - rhs) <= 1e-10 * max(1, abs(lhs))


def test_addition_matches_sigma_and_is_symmetric(ctx, rng):
    V = ctx.family.curves.V
    for _ in range(5):
        u, v = _pair(ctx, rng)
        a, b = ctx.direct_V(u), ctx.direct_V(v)
        uv, remainder = wp_add(addition_build(a, b), V.poly, return_remainder=True)
        vu = wp_add(addition_build(b, a), V.poly)
        assert remainder < 1e-8
        assert relative_error(uv, ctx.direct_V(u + v)) < 1e-6
        assert relative_error(uv, vu) < 1e-10


def test_addition_rejects_equal_arguments(ctx, rng):
    u, _ = _pair(ctx, rng)
    with pytest.raises(NearDegenerate):
        addition_build(ctx.direct_V(u), ctx.direct_V(u))


def test_unknown_fit_method(ctx, rng):
    u, v = _pair(ctx, rng)
    with pytest.raises(ValueError):
        addition_build(ctx.direct_V(u), ctx.direct_V(v), method="lsq")


def test_corollary_pipeline(ctx, rng):
    done = 0
    while done < 5:
        u1 = _abel_E(ctx, rng)
        u35, _ = _abel_C(ctx, rng)
        try:
            out = corollary_pipeline(ctx, u1, u35)
        except HefError:
            continue
        rev = corollary_pipeline(ctx, u1, u35, reverse=True)
        assert relative_error(out, ctx.direct_V(corollary_point(ctx, u1, u35))) < 1e-5
        assert relative_error(rev, out) < 1e-6
        done += 1


def test_corollary_pole_is_typed(ctx, rng):
    u35, _ = _abel_C(ctx, rng)
    with pytest.raises(InvalidInput):
        corollary_pipeline(ctx, 0.0, u35)
