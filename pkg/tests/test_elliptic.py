import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from zamolodchikov.elliptic import (
    EllipticContext,
    add_arguments,
    agm,
    complete_K,
    jacobi,
    jacobi_array,
    normalize,
    restore,
)
from zamolodchikov.errors import DomainError, PoleError

MODULI = (0.0, 0.3, 0.6, 0.9)


def quad_K(k):
    value, _ = integrate.quad(lambda t: 1.0 / math.sqrt(1.0 - (k * math.sin(t)) ** 2),
                              0.0, math.pi / 2, epsabs=1e-14, epsrel=1e-14)
    return value


def mp_jacobi(w, k):
    m = k * k
    return tuple(complex(mpmath.ellipfun(kind, complex(w), m=m)) for kind in ("sn", "cn", "dn"))


def test_agm_of_equal_arguments():
    assert agm(2.0, 2.0) == 2.0


def test_complete_K_at_zero():
    assert complete_K(0.0) == pytest.approx(math.pi / 2, abs=1e-15)


@pytest.mark.filterwarnings("ignore::scipy.integrate.IntegrationWarning")
@pytest.mark.parametrize("k", [1 / math.sqrt(2), 0.1, 0.3, 0.6, 0.9, 0.99])
def test_complete_K_matches_quadrature(k):
    assert abs(complete_K(k) - quad_K(k)) < 1e-12
    assert abs(complete_K(k) - float(mpmath.ellipk(k * k))) < 1e-13


def test_complete_K_lemniscatic_value():
    assert complete_K(1 / math.sqrt(2)) == pytest.approx(1.854074677301372, abs=1e-13)


def test_complementary_modulus():
    ctx = EllipticContext.from_modulus(0.6)
    assert ctx.k_prime == pytest.approx(0.8, abs=1e-15)
    assert ctx.big_K_prime == pytest.approx(complete_K(0.8), abs=1e-14)


def test_trigonometric_context():
    ctx = EllipticContext.from_modulus(0.0)
    assert ctx.trigonometric
    assert math.isinf(ctx.big_K_prime)


@pytest.mark.parametrize("k", [-0.1, 1.0, 1.5, float("nan")])
def test_modulus_out_of_range(k):
    with pytest.raises(DomainError):
        EllipticContext.from_modulus(k)


@pytest.mark.parametrize("k", MODULI)
def test_values_at_origin(k):
    sn, cn, dn = jacobi(0.0, EllipticContext.from_modulus(k))
    assert (sn, cn, dn) == (0, 1, 1)


def test_quarter_period():
    ctx = EllipticContext.from_modulus(0.6)
    sn, cn, dn = jacobi(ctx.big_K, ctx)
    assert abs(sn - 1) < 1e-14 and abs(cn) < 1e-14 and abs(dn - 0.8) < 1e-14


def test_half_quarter_period_against_series():
    k = 0.6
    ctx = EllipticContext.from_modulus(k)
    sn = jacobi(ctx.big_K / 2, ctx).sn
    assert abs(sn - 1 / math.sqrt(1.8)) < 1e-14
    assert abs(sn - mp_jacobi(ctx.big_K / 2, k)[0]) < 1e-14


@pytest.mark.parametrize("k", [0.3, 0.6, 0.9])
def test_grid_against_mpmath(k):
    ctx = EllipticContext.from_modulus(k)
    x = np.linspace(-1.9, 1.9, 9) * ctx.big_K
    y = np.linspace(-0.45, 0.45, 7) * ctx.big_K_prime
    w = (x[:, None] + 1j * y[None, :]).ravel()
    ours = np.array(jacobi_array(w, k))
    ref = np.array([mp_jacobi(z, k) for z in w]).T
    assert np.max(np.abs(ours - ref)) < 1e-11


@pytest.mark.parametrize("k", MODULI)
def test_grid_identities(k):
    ctx = EllipticContext.from_modulus(k)
    span_im = 0.45 * ctx.big_K_prime if k else 2.0
    x = np.linspace(0.0, 4 * ctx.big_K, 20)
    y = np.linspace(-span_im, span_im, 20)
    w = (x[:, None] + 1j * y[None, :]).ravel()
    sn, cn, dn = jacobi_array(w, k)
    assert np.max(np.abs(sn**2 + cn**2 - 1)) < 1e-11
    assert np.max(np.abs(dn**2 + k**2 * sn**2 - 1)) < 1e-11


def test_trigonometric_degeneration():
    w = np.linspace(-3, 3, 13)[:, None] + 1j * np.linspace(-1, 1, 5)[None, :]
    sn, cn, dn = jacobi_array(w, 0.0)
    assert np.max(np.abs(sn - np.sin(w))) < 1e-12
    assert np.max(np.abs(cn - np.cos(w))) < 1e-12
    assert np.max(np.abs(dn - 1)) < 1e-12


def test_pole_raises():
    ctx = EllipticContext.from_modulus(0.6)
    with pytest.raises(PoleError):
        jacobi(1j * ctx.big_K_prime, ctx)


def test_cd_pole_raises():
    ctx = EllipticContext.from_modulus(0.6)
    # dn vanishes at K + iK'
    values = jacobi(ctx.big_K + 1j * ctx.big_K_prime, ctx)
    assert abs(values.dn) < 1e-10
    with pytest.raises(PoleError):
        values.cd


def test_nonfinite_argument():
    with pytest.raises(DomainError):
        jacobi(complex(float("inf"), 0), EllipticContext.from_modulus(0.3))


def test_normalize_origin():
    ctx = EllipticContext.from_modulus(0.6)
    p = normalize(0.0, ctx)
    assert p.w == 0 and p.real_shifts == 0 and p.imag_shifts == 0


def test_normalize_full_real_period_flips_sn():
    ctx = EllipticContext.from_modulus(0.6)
    p = normalize(2 * ctx.big_K, ctx)
    assert abs(p.w) < 1e-15 and p.real_shifts == 1 and p.sn_sign == -1
    w = 0.3 + 0.1j
    sn_shift = jacobi(w + 2 * ctx.big_K, ctx).sn
    assert abs(sn_shift + jacobi(w, ctx).sn) < 1e-13


def test_normalize_with_imaginary_part():
    k = 0.6
    ctx = EllipticContext.from_modulus(k)
    w = 2 * ctx.big_K + 0.25j * ctx.big_K_prime
    p = normalize(w, ctx)
    assert abs(p.w - 0.25j * ctx.big_K_prime) < 1e-14
    assert p.real_shifts == 1 and p.imag_shifts == 0
    back = restore(p, jacobi(p.w, ctx), ctx)
    assert np.max(np.abs(np.array(back) - np.array(mp_jacobi(w, k)))) < 1e-12


@settings(max_examples=60, deadline=None)
@given(k=st.sampled_from([0.3, 0.6, 0.9]),
       x=st.floats(-10, 10), y=st.floats(-2.5, 2.5))
def test_restore_inverts_normalize(k, x, y):
    ctx = EllipticContext.from_modulus(k)
    w = complex(x * ctx.big_K, y * ctx.big_K_prime)
    ref = np.array(jacobi_array(w, k))
    if not np.all(np.isfinite(ref)) or np.max(np.abs(ref)) > 1e4:
        return
    p = normalize(w, ctx)
    assert 0 <= p.w.real < 2 * ctx.big_K and 0 <= p.w.imag < ctx.big_K_prime / 2
    back = np.array(restore(p, jacobi_array(p.w, k), ctx))
    assert np.max(np.abs(back - ref)) < 1e-9 * max(1.0, np.max(np.abs(ref)))


@settings(max_examples=80, deadline=None)
@given(k=st.floats(0.0, 0.95),
       a=st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False),
       b=st.complex_numbers(max_magnitude=1.5, allow_nan=False, allow_infinity=False))
def test_addition_theorem(k, a, b):
    va, vb, vab = (np.array(jacobi_array(z, k)) for z in (a, b, a + b))
    den = 1.0 - k * k * va[0] ** 2 * vb[0] ** 2
    if abs(den) < 1e-3 or np.max(np.abs(vab)) > 1e3:
        return
    assert np.max(np.abs(np.array(add_arguments(va, vb, k)) - vab)) < 1e-9


@settings(max_examples=80, deadline=None)
@given(k=st.floats(0.0, 0.99),
       w=st.complex_numbers(max_magnitude=3.0, allow_nan=False, allow_infinity=False))
def test_pythagorean_identities(k, w):
    sn, cn, dn = jacobi_array(w, k)
    scale = max(1.0, abs(sn) ** 2, abs(cn) ** 2)
    if scale > 1e4:
        return
    assert abs(sn**2 + cn**2 - 1) < 1e-11 * scale
    assert abs(dn**2 + k**2 * sn**2 - 1) < 1e-11 * scale


@settings(max_examples=40, deadline=None)
@given(k=st.floats(0.01, 0.95), x=st.floats(-4, 4))
def test_sn_is_odd_cn_dn_even(k, x):
    s1, c1, d1 = jacobi_array(x, k)
    s2, c2, d2 = jacobi_array(-x, k)
    assert abs(s1 + s2) < 1e-14 and abs(c1 - c2) < 1e-14 and abs(d1 - d2) < 1e-14
