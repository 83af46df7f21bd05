import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zamolodchikov.elliptic import EllipticContext, jacobi
from zamolodchikov.errors import NoConvergenceError, PoleError
from zamolodchikov.geometry import random_prism, solve_triangle
from zamolodchikov.param import (
    U,
    V,
    angle_phase,
    angles_from_w,
    build_calS,
    build_Rffm,
    build_uniform_L,
    calL,
    f,
    g,
    h,
    h_squared,
    invert_angles,
    korepanov_map,
    modulus_from_vertex,
    prism_apex_angles,
    rho_from_t,
    rho_minus,
    solve_phase,
    t_from_w,
    weight_factors,
)
from zamolodchikov.weights import build_L, free_fermion_residual, pack

PI = math.pi


def prism_vertices(n_prisms):
    for seed in range(n_prisms):
        yield from random_prism(seed).vertex_triangles


def wrap(x):
    return (x + PI) % (2 * PI) - PI


def test_modulus_right_angle():
    m = modulus_from_vertex((PI / 2,) * 3)
    assert m.sin_phi == 1.0 and m.k == 0.0 and m.phi == PI / 2


def test_modulus_equiangular():
    m = modulus_from_vertex((2 * PI / 3,) * 3)
    assert m.sin_phi == pytest.approx(math.sqrt(2 / 3), abs=1e-14)
    assert m.k == pytest.approx((1 - math.sqrt(2 / 3)) / (1 + math.sqrt(2 / 3)), abs=1e-14)
    assert m.k == pytest.approx(0.101021, abs=1e-6)


def test_inversion_singular_at_zero_modulus():
    with pytest.raises(NoConvergenceError):
        invert_angles((PI / 2,) * 3)


def test_angle_phase_quasi_period():
    ctx = EllipticContext.from_modulus(0.4)
    w = 0.37 + 0.21j
    a = angle_phase(w, ctx.k)
    assert abs(angle_phase(w + 2 * ctx.big_K, ctx.k) - a) < 1e-12
    assert abs(angle_phase(w + 1j * ctx.big_K_prime, ctx.k) - a) < 1e-12
    assert abs(angle_phase(w + 0.5j * ctx.big_K_prime, ctx.k) * a - 1) < 1e-12


def test_real_angle_roots_lie_on_quarter_line():
    ctx = EllipticContext.from_modulus(0.3)
    roots = solve_phase(cmath.exp(1.1j), ctx)
    assert len(roots) == 2
    for z in roots:
        assert z.imag == pytest.approx(ctx.big_K_prime / 4, abs=1e-10)
    assert roots[0].real + roots[1].real == pytest.approx(2 * ctx.big_K, abs=1e-10)


def test_round_trip_and_candidates():
    for tri in prism_vertices(10):
        pair = invert_angles(tri.theta)
        back = angles_from_w(pair.w1.w, pair.w2.w, pair.k)
        for b, t in zip(back, tri.theta):
            assert abs(cmath.exp(1j * b) - cmath.exp(1j * t)) < 1e-10
        cands = [wrap(c.real) for c in pair.theta1_candidates]
        assert all(abs(c.imag) < 1e-9 for c in pair.theta1_candidates)
        t1 = tri.theta[0]
        plus = [c for c in cands if abs(wrap(c - t1)) < 1e-9]
        minus = [c for c in cands if abs(wrap(c + t1)) < 1e-9]
        assert len(plus) == 1 and len(minus) == 1
        rest = [c for c in cands if c not in plus + minus]
        assert len(rest) == 2 and abs(wrap(rest[0] + rest[1])) < 1e-9


def test_equiangular_candidates():
    pair = invert_angles((2 * PI / 3,) * 3)
    cands = sorted(abs(wrap(c.real)) for c in pair.theta1_candidates)
    assert cands[0] == pytest.approx(2 * PI / 3, abs=1e-9)
    assert cands[1] == pytest.approx(2 * PI / 3, abs=1e-9)


def test_f_values():
    ctx = EllipticContext.from_modulus(0.6)
    assert f(0.0, ctx) == 0
    assert abs(f(ctx.big_K, ctx) - 1) < 1e-14


def test_U_cancellation():
    ctx = EllipticContext.from_modulus(0.5)
    assert abs(U(0.3 + 0.2j, 0.7 - 0.1j, 0.7 - 0.1j, ctx) - 1) < 1e-14


def test_g_and_h_relation():
    ctx = EllipticContext.from_modulus(0.45)
    x, y = 0.8 + 0.3j, 0.25 + 0.1j
    assert abs(h(x, y, ctx) ** 2 - h_squared(x, y, ctx)) < 1e-12
    assert abs(g(x, y, ctx) + g(y, x, ctx)) < 1e-12


def test_pole_propagates():
    ctx = EllipticContext.from_modulus(0.6)
    with pytest.raises(PoleError):
        f(1j * ctx.big_K_prime, ctx)


def test_rffm_at_origin():
    ctx = EllipticContext.from_modulus(0.3)
    expected = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]])
    assert np.array_equal(build_Rffm(0.0, ctx), expected)


@settings(max_examples=60, deadline=None)
@given(k=st.floats(0.0, 0.95),
       w=st.complex_numbers(max_magnitude=1.2, allow_nan=False, allow_infinity=False))
def test_rffm_free_fermion(k, w):
    ctx = EllipticContext.from_modulus(k)
    try:
        R = build_Rffm(w, ctx)
    except PoleError:
        return
    scale = max(1.0, np.abs(R).max()) ** 4
    assert abs(free_fermion_residual(R)) < 1e-11 * scale


def test_rffm_trigonometric_limit():
    ctx = EllipticContext.from_modulus(0.0)
    w = 0.4 + 0.3j
    R = build_Rffm(w, ctx)
    assert abs(R[0, 0] - cmath.cos(w)) < 1e-13
    assert abs(R[1, 1] - cmath.sin(w)) < 1e-13
    assert R[0, 3] == 0


def test_t_values_and_weight_factors():
    for tri in prism_vertices(10):
        pair = invert_angles(tri.theta)
        ctx = EllipticContext.from_modulus(pair.k)
        tv = t_from_w(pair, ctx)
        tg = np.array(tri.t)
        assert np.abs(np.abs(tv.t) - tg).max() < 1e-10
        assert abs(tv.products["t0t1"] - tg[0] * tg[1]) < 1e-10
        assert abs(tv.products["t2t3"] - tg[2] * tg[3]) < 1e-10
        assert abs(tv.products["t0t3"] - tg[0] * tg[3]) < 1e-10
        assert abs(tv.products["t1t2"] - tg[1] * tg[2]) < 1e-10
        assert abs(rho_minus(pair.w_minus, ctx) - rho_from_t(tg)[0]) < 1e-10
        wf = weight_factors(pair, ctx, tri.t)
        assert wf.branch in (1, -1)
        assert abs(wf.xi - wf.branch * h(pair.w1.original, pair.w2_lifted, ctx)) < 1e-10


def test_uniform_matches_gauge_route():
    for tri in prism_vertices(10):
        pair = invert_angles(tri.theta)
        ctx = EllipticContext.from_modulus(pair.k)
        wf = weight_factors(pair, ctx, tri.t)
        direct = build_L(tri, wf.xi).matrix
        uniform = build_uniform_L(pair, ctx, wf)
        assert np.abs(direct - uniform.matrix).max() < 1e-10
        assert uniform.free_fermion_residuals().max() < 1e-11


def test_uniform_first_block():
    tri = next(prism_vertices(1))
    pair = invert_angles(tri.theta)
    ctx = EllipticContext.from_modulus(pair.k)
    L = build_uniform_L(pair, ctx)
    rm = rho_minus(pair.w_minus, ctx)
    assert np.abs(L.blocks[(0, 0)] - 0.5 * rm * build_Rffm(pair.w_minus, ctx)).max() < 1e-14


@pytest.mark.parametrize("k", [0.2, 0.6, 0.9])
def test_meromorphic_blocks_lattice_periodic(k):
    ctx = EllipticContext.from_modulus(k)
    w1, w2 = 0.9 + 0.3j, 0.2 + 0.1j
    base = calL(w1, w2, ctx)
    for shift in (2 * ctx.big_K, 2j * ctx.big_K_prime):
        shifted = calL(w1 + shift, w2 + shift, ctx)
        assert np.abs(shifted - base).max() < 1e-10 * np.abs(base).max()


def test_calS_unit_entries():
    ctx = EllipticContext.from_modulus(0.5)
    S = build_calS(0.9 + 0.2j, 0.5 + 0.1j, 0.2 - 0.05j, ctx)
    for bits in ((0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)):
        assert S[pack(bits), pack(bits)] == 1
    assert np.count_nonzero(S) == 16


def test_calS_coincident_limit():
    ctx = EllipticContext.from_modulus(0.5)
    u1, u3 = 0.7 + 0.1j, 0.2 + 0.05j
    S = build_calS(u1, u1, u3, ctx)
    values = jacobi(2 * u1, ctx), jacobi(u1 - u3, ctx), jacobi(u1 + u3, ctx)
    expected = values[0].sd * values[1].cn / values[2].sd
    assert abs(S[pack((0, 1, 0)), pack((1, 0, 0))] - expected) < 1e-12
    assert abs(U(u1, u1, u3, ctx) - expected) < 1e-12


def test_V_is_finite():
    ctx = EllipticContext.from_modulus(0.5)
    assert np.isfinite(V(0.7 + 0.1j, 0.4, 0.2 - 0.05j, ctx))


def test_korepanov_coincident():
    ctx = EllipticContext.from_modulus(0.5)
    km = korepanov_map(0.4 + 0.1j, 0.4 + 0.1j, 0.2, ctx)
    assert km.varphi[0] == km.varphi[1]
    assert abs(km.theta[0]) == 0


@settings(max_examples=40, deadline=None)
@given(k=st.floats(0.05, 0.9),
       u=st.lists(st.complex_numbers(max_magnitude=0.6, allow_nan=False, allow_infinity=False),
                  min_size=3, max_size=3))
def test_korepanov_relations(k, u):
    ctx = EllipticContext.from_modulus(k)
    try:
        km = korepanov_map(*u, ctx)
    except (PoleError, ZeroDivisionError, FloatingPointError):
        return
    if not all(np.isfinite(km.varphi)) or max(abs(x) for x in km.varphi) > 5:
        return
    assert km.g_residual < 1e-10
    assert km.theta_residual < 1e-10
    assert abs(sum(km.theta) - PI) < 1e-12


def test_prism_apex_product():
    cfg = random_prism(2)
    ctx = EllipticContext.from_modulus(cfg.k)
    assert abs(np.prod(prism_apex_angles(cfg.u, ctx)) + 1) < 1e-12


def test_trigonometric_relations():
    # at k = 0 the angle map reduces to elementary functions
    w = 0.3 + 0.4j
    s, c = cmath.sin(2 * w), cmath.cos(2 * w)
    assert abs(angle_phase(w, 0.0) - (1 + s) / c) < 1e-13


def test_invert_triangle_object():
    tri = solve_triangle((2.0, 1.9, 1.4))
    assert invert_angles(tri.theta).branch_tag == invert_angles(tri.theta).branch_tag
