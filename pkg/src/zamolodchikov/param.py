"""Elliptic parameterisation of the vertex weights.

A valid vertex triangle is mapped to a modulus ``k`` and two points
``w1, w2`` on the elliptic curve.  In these variables the gauge-transformed
vertex operator, the static operator of a prism and the Korepanov variables
are meromorphic; the functions here evaluate them and invert the angle map.

Conventions
-----------
``angle_phase(w) = (1 + sn 2w)(1 - k sn 2w) / (cn 2w dn 2w)``.  A vertex with
angles ``(theta1, theta2, theta3)`` is parametrised by

    -angle_phase(w1) = exp(-i theta2)
     angle_phase(w2) = exp(i theta3)
     cd(2 w2) / cd(2 w1) = exp(i theta1)

``angle_phase`` has periods 2K and iK' and satisfies
``angle_phase(w + iK'/2) = 1 / angle_phase(w)``.  Real angles in (0, pi)
correspond to points on the line Im w = K'/4, in pairs ``x`` and ``2K - x``.

The gauge-transformed operators use the representative of ``w2`` with
``0 < Re(w1 - w2) < 2K`` (shift ``w2`` by 2K if needed).  Both ``angle_phase``
and ``cd(2w)`` are blind to that shift, but the meromorphic blocks are not.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .elliptic import ComplexPoint, EllipticContext, jacobi, jacobi_array, normalize
from .errors import (
    AmbiguityError,
    ConstraintError,
    DomainError,
    NoConvergenceError,
    PoleError,
)
from .geometry import SphericalTriangle, solve_triangle
from .weights import (
    BlockL,
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    I2,
    join_blocks,
    pack,
)

PI = math.pi

NEWTON_GRID = 8
NEWTON_DAMPING = 0.5
NEWTON_DAMPED_STEPS = 3
NEWTON_MAX_ITER = 80
NEWTON_TOL = 1e-12
ROOT_ACCEPT = 1e-10
BRANCH_TOL = 1e-9
POLE_TOL = 1e-10


# ---------------------------------------------------------------- modulus

@dataclass(frozen=True)
class ModulusResult:
    k: float
    phi: float
    ctx: EllipticContext
    sin_phi: float
    sin_phi_check: float


def sin_phi_from_excesses(triangle: SphericalTriangle) -> float:
    alpha = np.asarray(triangle.alpha)
    return float(2.0 * math.sqrt(np.prod(np.sin(alpha))) / math.sin(triangle.theta[0]))


def sin_phi_from_side(triangle: SphericalTriangle) -> float:
    return float(math.sin(triangle.theta[1]) * math.sin(triangle.sides[2]))


def modulus_from_sin_phi(sin_phi: float) -> float:
    return (1.0 - sin_phi) / (1.0 + sin_phi)


def modulus_from_vertex(triangle, check_tol: float = 1e-11) -> ModulusResult:
    """Modulus k = (1 - sin phi)/(1 + sin phi) of a vertex triangle.

    ``sin phi`` is computed from the excesses and cross-checked against
    ``sin theta2 * sin a3``.
    """
    tri = triangle if isinstance(triangle, SphericalTriangle) else solve_triangle(triangle)
    s = sin_phi_from_excesses(tri)
    s_check = sin_phi_from_side(tri)
    if abs(s - s_check) > check_tol:
        raise ConstraintError(f"sin phi disagrees between formulas: {s!r} vs {s_check!r}")
    # the right-angle case k = 0 is exact; snap rounding noise onto it
    if abs(s - 1.0) <= 1e-12:
        s = 1.0
    if not (0.0 < s <= 1.0):
        raise DomainError(f"sin phi = {s!r} outside (0, 1]")
    k = 0.0 if s == 1.0 else modulus_from_sin_phi(s)
    return ModulusResult(k=k, phi=math.asin(s), ctx=EllipticContext.from_modulus(k),
                         sin_phi=s, sin_phi_check=s_check)


# ---------------------------------------------------------------- angle map

def angle_phase(w, k: float):
    """(1 + sn 2w)(1 - k sn 2w) / (cn 2w dn 2w); broadcasts over arrays."""
    s, c, d = jacobi_array(2.0 * np.asarray(w, dtype=complex), k)
    return (1.0 + s) * (1.0 - k * s) / (c * d)


def angle_phase_log_derivative(w, k: float):
    s, c, d = jacobi_array(2.0 * np.asarray(w, dtype=complex), k)
    ds, dc, dd = c * d, -s * d, -k * k * s * c
    return 2.0 * (ds / (1.0 + s) - k * ds / (1.0 - k * s) - dc / c - dd / d)


def cd_double(w, k: float):
    """cd(2w)."""
    _, c, d = jacobi_array(2.0 * np.asarray(w, dtype=complex), k)
    return c / d


def _newton_starts(ctx: EllipticContext, grid: int) -> np.ndarray:
    frac = (np.arange(grid) + 0.5) / grid
    x = frac * 2.0 * ctx.big_K
    y = frac * 0.5 * ctx.big_K_prime
    return (x[:, None] + 1j * y[None, :]).ravel()


def solve_phase(target: complex, ctx: EllipticContext, grid: int = NEWTON_GRID) -> list[complex]:
    """All roots of ``angle_phase(w) = target`` in [0, 2K) x [0, K'/2).

    Damped Newton iteration started from a ``grid`` x ``grid`` lattice of
    points covering the rectangle; roots are reduced into the rectangle and
    de-duplicated.
    """
    if ctx.trigonometric:
        raise NoConvergenceError(
            "the angle map has no finite roots on the unit circle at k = 0; "
            "the parameters run off to infinity in the trigonometric limit")
    k = ctx.k
    target = complex(target)
    w = _newton_starts(ctx, grid)
    alive = np.ones(w.shape, dtype=bool)
    with np.errstate(all="ignore"):
        for it in range(NEWTON_MAX_ITER):
            val = angle_phase(w, k)
            res = val - target
            done = np.abs(res) < NEWTON_TOL
            step = res / (val * angle_phase_log_derivative(w, k))
            step = np.where(done | ~np.isfinite(step), 0.0, step)
            damping = NEWTON_DAMPING if it < NEWTON_DAMPED_STEPS else 1.0
            w = w - damping * step
            alive &= np.isfinite(w)
            w = np.where(alive, w, 0.0)
            if np.all(done | ~alive):
                break
        final = np.abs(angle_phase(w, k) - target)
    roots: list[complex] = []
    two_K, big_Kp = 2.0 * ctx.big_K, ctx.big_K_prime
    for z, r, ok in zip(w, final, alive):
        if not ok or not (r < ROOT_ACCEPT):
            continue
        z = complex(z.real % two_K, z.imag % big_Kp)
        if z.imag >= 0.5 * big_Kp:
            continue
        if abs(angle_phase(z, k) - target) >= ROOT_ACCEPT:
            continue
        if all(_lattice_distance(z, q, ctx) > 1e-7 for q in roots):
            roots.append(z)
    roots.sort(key=lambda z: (z.real, z.imag))
    return roots


def _lattice_distance(a: complex, b: complex, ctx: EllipticContext) -> float:
    d = a - b
    x = (d.real + ctx.big_K) % (2.0 * ctx.big_K) - ctx.big_K
    return abs(complex(x, d.imag))


def lift_against(anchor: complex, w: complex, ctx: EllipticContext) -> complex:
    """Shift ``w`` by a multiple of 2K so that 0 <= Re(anchor - w) < 2K."""
    two_K = 2.0 * ctx.big_K
    n = math.floor((anchor - w).real / two_K)
    return w + n * two_K


def lift_representatives(u, ctx: EllipticContext) -> tuple[complex, complex, complex]:
    """Lift u2, u3 so that Re(u1 - u2), Re(u1 - u3) and Re(u2 - u3) lie in [0, 2K)."""
    u1, u2, u3 = (complex(x) for x in u)
    u2 = lift_against(u1, u2, ctx)
    u3 = lift_against(u1, u3, ctx)
    if not 0.0 <= (u2 - u3).real < 2.0 * ctx.big_K:
        raise ConstraintError("no common lift: Re(u2 - u3) falls outside [0, 2K)")
    return u1, u2, u3


# ---------------------------------------------------------------- inversion

@dataclass(frozen=True)
class WPair:
    """Elliptic parameters of one vertex.

    ``w1`` and ``w2`` are the points reduced into the periodicity rectangle;
    ``w2_lifted`` is ``w2`` shifted by 2K where needed so that
    ``0 <= Re(w1 - w2_lifted) < 2K``.  ``w_plus`` and ``w_minus`` are formed
    with the lifted value.  ``branch_tag`` is the index pair of the selected
    roots among the candidates, and ``theta1_candidates`` lists the angle
    recovered from every candidate pair.
    """

    w1: ComplexPoint
    w2: ComplexPoint
    w2_lifted: complex
    w_plus: complex
    w_minus: complex
    branch_tag: tuple[int, int]
    theta1_candidates: tuple[complex, ...] = ()
    roots1: tuple[complex, ...] = ()
    roots2: tuple[complex, ...] = ()
    k: float = 0.0

    def to_dict(self) -> dict:
        def cx(z):
            return [float(z.real), float(z.imag)]
        return {
            "k": self.k,
            "w1": cx(self.w1.w),
            "w2": cx(self.w2.w),
            "w2_lifted": cx(self.w2_lifted),
            "w_plus": cx(self.w_plus),
            "w_minus": cx(self.w_minus),
            "branch_tag": list(self.branch_tag),
            "theta1_candidates": [cx(z) for z in self.theta1_candidates],
        }


def angles_from_w(w1: complex, w2: complex, k: float) -> tuple[complex, complex, complex]:
    """Angles (theta1, theta2, theta3) of a parameter pair (complex in general)."""
    e1 = cd_double(w2, k) / cd_double(w1, k)
    e2 = -1.0 / angle_phase(w1, k)
    e3 = angle_phase(w2, k)
    return tuple(complex(-1j * np.log(e)) for e in (e1, e2, e3))


def invert_angles(theta, modulus: ModulusResult | None = None) -> WPair:
    """Solve the angle map of one vertex for (w1, w2).

    Each equation has two roots in the periodicity rectangle.  Of the four
    pairings, exactly one reproduces exp(i theta1); the others give
    exp(-i theta1) or the companion angle of a second triangle with the same
    modulus.
    """
    theta = tuple(float(x) for x in theta)
    if modulus is None:
        modulus = modulus_from_vertex(theta)
    ctx, k = modulus.ctx, modulus.k
    roots1 = solve_phase(-np.exp(-1j * theta[1]), ctx)
    roots2 = solve_phase(np.exp(1j * theta[2]), ctx)
    if not roots1 or not roots2:
        raise NoConvergenceError(f"Newton grid found no roots for angles {theta}")
    target = np.exp(1j * theta[0])
    matches, candidates = [], []
    for (i, a), (j, b) in itertools.product(enumerate(roots1), enumerate(roots2)):
        e = complex(cd_double(b, k) / cd_double(a, k))
        candidates.append(complex(-1j * np.log(e)))
        if abs(e - target) < BRANCH_TOL:
            matches.append((i, j))
    if len(matches) != 1:
        raise AmbiguityError(
            f"{len(matches)} branches reproduce theta1 = {theta[0]!r} "
            f"(roots: {len(roots1)} x {len(roots2)})")
    i, j = matches[0]
    w1, w2 = roots1[i], roots2[j]
    w2_lifted = lift_against(w1, w2, ctx)
    return WPair(
        w1=normalize(w1, ctx),
        w2=normalize(w2, ctx),
        w2_lifted=w2_lifted,
        w_plus=w1 + w2_lifted,
        w_minus=w1 - w2_lifted,
        branch_tag=(i, j),
        theta1_candidates=tuple(candidates),
        roots1=tuple(roots1),
        roots2=tuple(roots2),
        k=k,
    )


def pair_from_w(w1: complex, w2: complex, ctx: EllipticContext) -> WPair:
    """A WPair built directly from parameters (no inversion)."""
    w1, w2 = complex(w1), complex(w2)
    w2_lifted = lift_against(w1, w2, ctx)
    return WPair(w1=normalize(w1, ctx), w2=normalize(w2, ctx), w2_lifted=w2_lifted,
                 w_plus=w1 + w2_lifted, w_minus=w1 - w2_lifted, branch_tag=(0, 0), k=ctx.k)


# ---------------------------------------------------------------- function family

def _jac(w, ctx: EllipticContext):
    return jacobi(w, ctx, POLE_TOL)


def _safe_div(num, den, what: str, where):
    if abs(den) < POLE_TOL:
        raise PoleError(f"{what} has a pole at {where}", where=where)
    return num / den


def f(w, ctx: EllipticContext) -> complex:
    """k'^2 sn w / ((cn w + dn w)(k cn w + dn w))."""
    s, c, d = _jac(w, ctx)
    kp2 = ctx.k_prime ** 2
    return _safe_div(kp2 * s, (c + d) * (ctx.k * c + d), "f", w)


def sd(w, ctx: EllipticContext) -> complex:
    return _jac(w, ctx).sd


def cd(w, ctx: EllipticContext) -> complex:
    return _jac(w, ctx).cd


def g(x, y, ctx: EllipticContext) -> complex:
    """k'^2 sd(x - y) sd(x + y) / (cn(x - y) cn(x + y))."""
    m, p = _jac(x - y, ctx), _jac(x + y, ctx)
    return _safe_div(ctx.k_prime ** 2 * m.sd * p.sd, m.cn * p.cn, "g", (x, y))


def h_squared(x, y, ctx: EllipticContext) -> complex:
    """cd(x - y) sn(x - y) / (cd(x + y) sn(x + y))."""
    m, p = _jac(x - y, ctx), _jac(x + y, ctx)
    return _safe_div(m.cd * m.sn, p.cd * p.sn, "h", (x, y))


def h(x, y, ctx: EllipticContext) -> complex:
    """Principal square root of :func:`h_squared`."""
    return complex(np.sqrt(complex(h_squared(x, y, ctx))))


def U(x, y, z, ctx: EllipticContext) -> complex:
    """sd(x + y) cn(x - z) / (cn(x - y) sd(x + z))."""
    return _safe_div(sd(x + y, ctx) * _jac(x - z, ctx).cn,
                     _jac(x - y, ctx).cn * sd(x + z, ctx), "U", (x, y, z))


def V(x, y, z, ctx: EllipticContext) -> complex:
    """-k'^2 sd(y - x) sd(y + z) / (cn(y + x) cn(y - z))."""
    return _safe_div(-ctx.k_prime ** 2 * sd(y - x, ctx) * sd(y + z, ctx),
                     _jac(y + x, ctx).cn * _jac(y - z, ctx).cn, "V", (x, y, z))


# ---------------------------------------------------------------- t-values and weight factors

@dataclass(frozen=True)
class TValues:
    """t-values recovered from (w1, w2).

    ``t`` is in geometric order (t0, t1, t2, t3).  ``products`` holds the
    pairwise products t0t1, t2t3, t0t3, t1t2 from their square-root-free
    or single-root forms.
    """

    t: tuple[complex, complex, complex, complex]
    products: dict


def t_from_w(pair: WPair, ctx: EllipticContext) -> TValues:
    """t0..t3 from the parameter pair.

    Each value is the principal square root of a product or ratio of
    ``f`` at ``w-``, ``K - w-``, ``w+`` and ``K - w+``.  The four roots are
    returned in the order in which they match the geometric t-values of the
    source triangle.
    """
    K = ctx.big_K
    fm, fKm = f(pair.w_minus, ctx), f(K - pair.w_minus, ctx)
    fp, fKp = f(pair.w_plus, ctx), f(K - pair.w_plus, ctx)
    r = np.sqrt
    a = complex(r(-1j * fm / fKp))
    b = complex(r(1j * fm * fKp))
    c = complex(r(-1j * fKm * fp))
    d = complex(r(1j * fKm / fp))
    t = (b, a, d, c)
    t1t2 = complex(r(fm * fKm / (fp * fKp)))
    products = {
        "t0t1": fm,
        "t2t3": fKm,
        "t1t2": t1t2,
        "t0t3": fp * fKp * t1t2,
    }
    return TValues(t=t, products=products)


@dataclass(frozen=True)
class WeightFactors:
    """rho_minus, rho_plus and the gauge parameter xi = -rho_plus/rho_minus.

    ``branch`` is the sign relating ``xi`` to the principal value of ``h``.
    """

    rho_minus: complex
    rho_plus: complex
    xi: complex
    branch: int = 1

    @property
    def residual(self) -> float:
        return abs(self.xi * self.rho_minus + self.rho_plus)


def rho_minus(w_minus, ctx: EllipticContext) -> complex:
    """4(1 - sn)dn / (cn (cn dn + (1 - sn)(1 + k sn))) at w-."""
    s, c, d = _jac(w_minus, ctx)
    return _safe_div(4.0 * (1.0 - s) * d, c * (c * d + (1.0 - s) * (1.0 + ctx.k * s)),
                     "rho_minus", w_minus)


def rho_from_t(t) -> tuple[complex, complex]:
    """(rho_minus, rho_plus) as polynomials in the t-values."""
    t0, t1, t2, t3 = t
    rm = 1.0 + t0 * t1 + t2 * t3 - t0 * t1 * t2 * t3
    rp = t0 * t3 - t1 * t2 + 1j * (t0 * t2 - t1 * t3)
    return complex(rm), complex(rp)


def weight_factors(pair: WPair, ctx: EllipticContext, t=None) -> WeightFactors:
    """rho_minus, rho_plus and xi at a parameter pair.

    Without ``t`` the principal branch of ``h`` is used.  With geometric
    ``t`` values the gauge parameter is taken from the t-polynomials and the
    sign relative to principal ``h`` is recorded.
    """
    rm = rho_minus(pair.w_minus, ctx)
    hp = h(pair.w1.original, pair.w2_lifted, ctx)
    if t is None:
        return WeightFactors(rho_minus=rm, rho_plus=-rm * hp, xi=hp, branch=1)
    rm_t, rp_t = rho_from_t(t)
    xi = -rp_t / rm_t
    branch = 1 if abs(xi - hp) <= abs(xi + hp) else -1
    return WeightFactors(rho_minus=rm_t, rho_plus=rp_t, xi=xi, branch=branch)


# ---------------------------------------------------------------- operators

def build_Rffm(w, ctx: EllipticContext) -> np.ndarray:
    """Free-fermion eight-vertex matrix with entries cd w, sn w, 1, k cd w sn w."""
    vals = _jac(w, ctx)
    c, s = vals.cd, vals.sn
    kcs = ctx.k * c * s
    return np.array([
        [c, 0, 0, kcs],
        [0, s, 1, 0],
        [0, 1, s, 0],
        [kcs, 0, 0, c],
    ], dtype=complex)


_SZ1 = np.kron(PAULI_Z, I2)
_SX1 = np.kron(PAULI_X, I2)
_SY1 = np.kron(PAULI_Y, I2)


def uniform_blocks(w1, w2, ctx: EllipticContext) -> dict[tuple[int, int], np.ndarray]:
    """Meromorphic blocks of the gauge-transformed operator at (w1, w2).

    Uses rho_plus / xi = -rho_minus and rho_plus * xi = -rho_minus * h^2, so
    no square root is taken.  Includes the overall factor one half that
    relates the coefficient polynomials to the conjugated operator.
    """
    wm, wp = w1 - w2, w1 + w2
    rm = rho_minus(wm, ctx)
    h2 = h_squared(w1, w2, ctx)
    Rm, Rp = build_Rffm(wm, ctx), build_Rffm(wp, ctx)
    return {
        (0, 0): 0.5 * rm * Rm,
        (0, 1): 0.5 * rm * _SZ1 @ Rp,
        (1, 0): -0.5j * rm * h2 * _SX1 @ Rp @ _SY1,
        (1, 1): 0.5 * rm * _SY1 @ Rm @ _SY1,
    }


def calL(w1, w2, ctx: EllipticContext) -> np.ndarray:
    """8x8 meromorphic gauge-transformed vertex operator; no lifting applied."""
    return join_blocks(uniform_blocks(complex(w1), complex(w2), ctx))


def build_uniform_L(pair: WPair, ctx: EllipticContext,
                    factors: WeightFactors | None = None) -> BlockL:
    """BlockL assembled from the meromorphic blocks at the lifted pair.

    The blocks depend on xi only through xi^2.  ``xi`` and the primed
    coefficients follow ``factors`` when given (e.g. the t-polynomial
    branch), otherwise the principal branch of h.
    """
    w1, w2 = pair.w1.original, pair.w2_lifted
    blocks = uniform_blocks(w1, w2, ctx)
    wm, wp = w1 - w2, w1 + w2
    rm = rho_minus(wm, ctx)
    xi = h(w1, w2, ctx) if factors is None else factors.branch * h(w1, w2, ctx)
    rp = -rm * xi
    m, p = _jac(wm, ctx), _jac(wp, ctx)
    coeffs = (rm * m.cd, rm * m.sn, rm, rm * ctx.k * m.cd * m.sn)
    primes = (rp * p.cd, rp * p.sn, rp, rp * ctx.k * p.cd * p.sn)
    return BlockL(blocks=blocks, coeffs=coeffs, coeffs_prime=primes, xi=xi)


def build_calS(u1, u2, u3, ctx: EllipticContext) -> np.ndarray:
    """Static operator of the prism apex in the meromorphic gauge."""
    u1, u2, u3 = complex(u1), complex(u2), complex(u3)
    M = np.zeros((8, 8), dtype=complex)

    def put(lo, up, value):
        M[pack(lo), pack(up)] = value

    for bits in ((0, 0, 0), (1, 1, 0), (1, 0, 1), (0, 1, 1)):
        put(bits, bits, 1.0)
    put((0, 1, 0), (1, 0, 0), U(u1, u2, u3, ctx))
    put((0, 1, 0), (0, 0, 1), U(u3, u2, u1, ctx))
    put((1, 0, 0), (0, 0, 1), V(u1, u2, u3, ctx))
    put((1, 0, 0), (0, 1, 0), U(u1, -u2, -u3, ctx))
    put((0, 0, 1), (0, 1, 0), U(u3, -u2, -u1, ctx))
    put((0, 0, 1), (1, 0, 0), V(-u1, u2, -u3, ctx))
    put((1, 1, 1), (0, 0, 1), U(u1, -u2, u3, ctx))
    put((1, 1, 1), (1, 0, 0), U(u3, -u2, u1, ctx))
    put((1, 1, 1), (0, 1, 0), V(u1, u2, -u3, ctx))
    put((0, 0, 1), (1, 1, 1), U(u1, u2, -u3, ctx))
    put((1, 0, 0), (1, 1, 1), U(u3, u2, -u1, ctx))
    put((0, 1, 0), (1, 1, 1), V(-u1, u2, u3, ctx))
    return M


# ---------------------------------------------------------------- prism and static angles

def prism_apex_angles(u, ctx: EllipticContext) -> tuple[complex, complex, complex]:
    """exp(i theta) for the three apex angles from u1, u2, u3."""
    c1, c2, c3 = (complex(cd_double(x, ctx.k)) for x in u)
    return c2 / c1, -c1 / c3, c3 / c2


def prism_base_phases(u, ctx: EllipticContext) -> tuple[complex, complex, complex]:
    """exp(i theta4), exp(i theta5), exp(i theta6) from u1, u2, u3."""
    u1, u2, u3 = u
    k = ctx.k
    return (complex(-1.0 / angle_phase(u1, k)), complex(angle_phase(u2, k)),
            complex(angle_phase(u3, k)))


def static_phases(u, ctx: EllipticContext) -> tuple[complex, ...]:
    """exp(i theta1..6) of the static-elliptic parameterisation from u1..u4."""
    c1, c2, c3, c4 = (complex(cd_double(x, ctx.k)) for x in u)
    return (c2 / c1, -c1 / c3, c3 / c2, -c1 / c4, c4 / c2, c4 / c3)


def static_angles(u, ctx: EllipticContext) -> tuple[complex, ...]:
    """Six (generally complex) static angles; real parts in (-pi, pi]."""
    return tuple(complex(-1j * np.log(e)) for e in static_phases(u, ctx))


def static_tan_half(u, ctx: EllipticContext) -> tuple[complex, ...]:
    """tan(theta_i / 2) for the six static angles through g."""
    u1, u2, u3, u4 = (complex(x) for x in u)
    return (
        -1j * g(u1, u2, ctx),
        1j / g(u1, u3, ctx),
        -1j * g(u2, u3, ctx),
        1j / g(u1, u4, ctx),
        -1j * g(u2, u4, ctx),
        -1j * g(u3, u4, ctx),
    )


@dataclass(frozen=True)
class KorepanovMap:
    varphi: tuple[complex, complex, complex]
    theta: tuple[complex, complex, complex]
    g_residual: float
    theta_residual: float


def korepanov_map(u1, u2, u3, ctx: EllipticContext) -> KorepanovMap:
    """Korepanov variables tanh(varphi_i) = (1 - cd 2u_i)/(1 + cd 2u_i).

    Checks g(u_j, u_k) = tanh(varphi_j - varphi_k) for all ordered pairs and
    compares the angles 2i(varphi2 - varphi1), pi + 2i(varphi1 - varphi3),
    2i(varphi3 - varphi2) with the apex angles of (u1, u2, u3) through
    their exponentials.
    """
    u = (complex(u1), complex(u2), complex(u3))
    c = [complex(cd_double(x, ctx.k)) for x in u]
    for x, ci in zip(u, c):
        if abs(1.0 + ci) < POLE_TOL:
            raise PoleError(f"cd(2u) = -1 at u = {x}", where=x)
    phi = tuple(complex(np.arctanh((1.0 - ci) / (1.0 + ci))) for ci in c)
    g_res = 0.0
    for j, k in itertools.permutations(range(3), 2):
        g_res = max(g_res, abs(g(u[j], u[k], ctx) - np.tanh(phi[j] - phi[k])))
    theta = (2j * (phi[1] - phi[0]), PI + 2j * (phi[0] - phi[2]), 2j * (phi[2] - phi[1]))
    expected = prism_apex_angles(u, ctx)
    theta_res = max(abs(np.exp(1j * t) - e) for t, e in zip(theta, expected))
    return KorepanovMap(varphi=phi, theta=theta, g_residual=float(g_res),
                        theta_residual=float(theta_res))


# ---------------------------------------------------------------- prism inversion

@dataclass(frozen=True)
class PrismInversion:
    k: float
    phi: float
    u: tuple[complex, complex, complex]
    u_lifted: tuple[complex, complex, complex]
    vertex_moduli: tuple[float, float, float]
    apex_residual: float
    base_residual: float


def prism_modulus(theta6, base_triangles=None) -> tuple[float, float, tuple[float, float, float]]:
    """Modulus from the (theta1, theta4, theta5) vertex via sin(phi) = sin(theta4) sin(b3)."""
    from .geometry import vertex_angle_sets

    if base_triangles is None:
        base_triangles = [solve_triangle(s) for s in vertex_angle_sets(theta6)[1:]]
    first = base_triangles[0]
    sin_phi = min(1.0, math.sin(theta6[3]) * math.sin(first.sides[2]))
    k = modulus_from_sin_phi(sin_phi)
    moduli = tuple(modulus_from_vertex(t).k for t in base_triangles)
    return k, math.asin(sin_phi), moduli


def invert_prism(theta6, base_triangles=None, moduli_tol: float = 1e-10) -> PrismInversion:
    """Solve the prism parameterisation for (k, u1, u2, u3).

    The three base-angle equations each have two roots; the unique
    combination matching all three apex phases is kept.
    """
    theta6 = tuple(float(x) for x in theta6)
    k, phi, moduli = prism_modulus(theta6, base_triangles)
    if max(moduli) - min(moduli) > moduli_tol or abs(k - moduli[0]) > moduli_tol:
        raise ConstraintError(f"vertex moduli disagree: {moduli} (base k = {k})")
    ctx = EllipticContext.from_modulus(k)
    t1, t2, t3, t4, t5, t6 = theta6
    r1 = solve_phase(-np.exp(-1j * t4), ctx)
    r2 = solve_phase(np.exp(1j * t5), ctx)
    r3 = solve_phase(np.exp(1j * t6), ctx)
    apex = np.exp(1j * np.array([t1, t2, t3]))
    good = []
    for u in itertools.product(r1, r2, r3):
        err = np.abs(np.array(prism_apex_angles(u, ctx)) - apex).max()
        if err < BRANCH_TOL:
            good.append((u, err))
    if len(good) != 1:
        raise AmbiguityError(f"{len(good)} root combinations reproduce the apex angles")
    u, apex_err = good[0]
    base_err = np.abs(np.array(prism_base_phases(u, ctx)) - np.exp(1j * np.array([t4, t5, t6]))).max()
    return PrismInversion(
        k=k,
        phi=phi,
        u=tuple(complex(x) for x in u),
        u_lifted=lift_representatives(u, ctx),
        vertex_moduli=moduli,
        apex_residual=float(apex_err),
        base_residual=float(base_err),
    )
