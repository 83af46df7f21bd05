"""Vertex operators on three two-state spaces.

Operators are dense 8x8 complex arrays.  Rows are indexed by the incoming
triple ``(i1, i2, i3)`` and columns by the outgoing triple ``(j1, j2, j3)``,
each packed as ``4*i1 + 2*i2 + i3``.  With this layout the products in the
tetrahedron equation are ordinary matrix products.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError, GaugeError, InvalidTriangleError
from .geometry import SphericalTriangle, solve_triangle

PI = math.pi

HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)
TAU = np.diag([1.0, 1j])
V0 = np.array([1.0, 0.0])
V1 = np.array([0.0, 1.0])
I2 = np.eye(2)

STATIC_SUM_TOL = 1e-10


def gauge_diag(xi) -> np.ndarray:
    """D(xi) = diag(1, xi)."""
    return np.diag([1.0, xi]).astype(complex)


def kron3(a, b, c) -> np.ndarray:
    return np.kron(np.kron(a, b), c)


def pack(bits) -> int:
    i1, i2, i3 = bits
    return 4 * i1 + 2 * i2 + i3


def unpack(index: int) -> tuple[int, int, int]:
    return (index >> 2) & 1, (index >> 1) & 1, index & 1


def parity_mask() -> np.ndarray:
    """True where incoming and outgoing parities agree."""
    p = np.array([sum(unpack(i)) % 2 for i in range(8)])
    return p[:, None] == p[None, :]


# (lower, upper, sign) for each weight, grouped by the t-monomial they carry
_ONE = [((0, 0, 0), (0, 0, 0)), ((0, 1, 1), (0, 1, 1)), ((1, 0, 1), (1, 0, 1)), ((1, 1, 0), (1, 1, 0))]
_DIAG = [((1, 1, 1), (1, 1, 1)), ((1, 0, 0), (1, 0, 0)), ((0, 1, 0), (0, 1, 0)), ((0, 0, 1), (0, 0, 1))]
_T23 = [((0, 0, 1), (0, 1, 0), 1), ((0, 1, 0), (0, 0, 1), 1), ((1, 1, 1), (1, 0, 0), -1), ((1, 0, 0), (1, 1, 1), -1)]
_T01 = [((1, 1, 0), (1, 0, 1), 1), ((1, 0, 1), (1, 1, 0), 1), ((0, 0, 0), (0, 1, 1), -1), ((0, 1, 1), (0, 0, 0), -1)]
_T13 = [((0, 1, 0), (1, 1, 1), 1), ((0, 0, 1), (1, 0, 0), 1), ((1, 0, 0), (0, 0, 1), -1), ((1, 1, 1), (0, 1, 0), -1)]
_T02 = [((1, 0, 1), (0, 0, 0), 1), ((1, 1, 0), (0, 1, 1), 1), ((0, 1, 1), (1, 1, 0), -1), ((0, 0, 0), (1, 0, 1), -1)]
_T12 = [((1, 1, 1), (0, 0, 1), 1), ((0, 0, 1), (1, 1, 1), 1), ((0, 1, 0), (1, 0, 0), 1), ((1, 0, 0), (0, 1, 0), 1)]
_T03 = [((0, 0, 0), (1, 1, 0), 1), ((1, 1, 0), (0, 0, 0), 1), ((1, 0, 1), (0, 1, 1), 1), ((0, 1, 1), (1, 0, 1), 1)]


def weights_from_t(t) -> np.ndarray:
    """The 8x8 vertex operator for given t0..t3 (real or complex)."""
    t0, t1, t2, t3 = t
    M = np.zeros((8, 8), dtype=complex)
    for lo, up in _ONE:
        M[pack(lo), pack(up)] = 1.0
    for lo, up in _DIAG:
        M[pack(lo), pack(up)] = t0 * t1 * t2 * t3
    for table, value in ((_T23, t2 * t3), (_T01, t0 * t1), (_T13, -1j * t1 * t3),
                         (_T02, 1j * t0 * t2), (_T12, t1 * t2), (_T03, t0 * t3)):
        for lo, up, sign in table:
            M[pack(lo), pack(up)] = sign * value
    return M


def _as_triangle(triangle) -> SphericalTriangle:
    if isinstance(triangle, SphericalTriangle):
        return triangle
    return solve_triangle(triangle)


def build_R(triangle) -> np.ndarray:
    """Vertex operator R(theta1, theta2, theta3); accepts a triangle or three angles."""
    return weights_from_t(_as_triangle(triangle).t)


def static_t(theta) -> np.ndarray:
    th = np.asarray(theta, dtype=float)
    if th.shape != (3,) or np.any(th <= 0) or np.any(th >= PI):
        raise ConstraintError(f"static angles must lie in (0, pi), got {th.tolist()}")
    if abs(th.sum() - PI) > STATIC_SUM_TOL:
        raise ConstraintError(f"static angles must sum to pi, got sum - pi = {th.sum() - PI:.3e}")
    return np.sqrt(np.tan(0.5 * th))


def build_S(theta) -> np.ndarray:
    """Static-limit operator: the vertex operator with t0 = 0 and t_i = sqrt(tan(theta_i/2))."""
    return weights_from_t((0.0, *static_t(theta)))


def _block_matrix(p, q, r, s) -> np.ndarray:
    """[[p,0,0,s],[0,q,r,0],[0,r',q',0],[s',0,0,p']] from 4-tuples p=(p,p'), ..."""
    return np.array([
        [p[0], 0, 0, s[0]],
        [0, q[0], r[0], 0],
        [0, r[1], q[1], 0],
        [s[1], 0, 0, p[1]],
    ], dtype=complex)


def split_blocks(M: np.ndarray) -> dict[tuple[int, int], np.ndarray]:
    """4x4 blocks keyed by (incoming, outgoing) state of the first space."""
    T = np.asarray(M).reshape(2, 4, 2, 4)
    return {(a, b): T[a, :, b, :].copy() for a in (0, 1) for b in (0, 1)}


def join_blocks(blocks) -> np.ndarray:
    T = np.zeros((2, 4, 2, 4), dtype=complex)
    for (a, b), B in blocks.items():
        T[a, :, b, :] = B
    return T.reshape(8, 8)


def free_fermion_residual(block: np.ndarray) -> complex:
    """w1 w2 + w3 w4 - w5 w6 - w7 w8 for an eight-vertex shaped 4x4 block."""
    B = np.asarray(block)
    w1, w2, w3, w4 = B[0, 0], B[3, 3], B[1, 1], B[2, 2]
    w5, w6, w7, w8 = B[1, 2], B[2, 1], B[0, 3], B[3, 0]
    return w1 * w2 + w3 * w4 - w5 * w6 - w7 * w8


@dataclass(frozen=True)
class BlockL:
    """The four 4x4 blocks of the gauge-transformed vertex operator.

    ``blocks[(a, b)]`` acts on spaces 2 and 3 with the first space taken
    from incoming state ``a`` to outgoing state ``b``.  ``coeffs`` holds
    (a, b, c, d) and ``coeffs_prime`` holds (a', b', c', d').
    """

    blocks: dict
    coeffs: tuple
    coeffs_prime: tuple
    xi: complex

    @property
    def matrix(self) -> np.ndarray:
        return join_blocks(self.blocks)

    def abcd_residuals(self) -> np.ndarray:
        a, b, c, d = self.coeffs
        ap, bp, cp, dp = self.coeffs_prime
        return np.abs([
            a * b - ap * bp,
            c * d - cp * dp,
            a * a + b * b - c * c - d * d,
            ap * ap + bp * bp - cp * cp - dp * dp,
        ])

    def free_fermion_residuals(self) -> np.ndarray:
        return np.abs([free_fermion_residual(B) for B in self.blocks.values()])


def l_coefficients(t):
    """(a, b, c, d) and (a', b', c', d') as polynomials in the t-values."""
    t0, t1, t2, t3 = t
    p01, p23, p = t0 * t1, t2 * t3, t0 * t1 * t2 * t3
    coeffs = (1 - p01 + p23 + p, 1 + p01 - p23 + p, 1 + p01 + p23 - p, 1 - p01 - p23 - p)
    x, y, u, v = t1 * t2, t0 * t3, 1j * t0 * t2, 1j * t1 * t3
    primes = (-x - y + u + v, -x - y - u - v, -x + y + u - v, -x + y - u + v)
    return coeffs, primes


def l_blocks_closed_form(t, xi) -> dict[tuple[int, int], np.ndarray]:
    """Blocks of the gauge-transformed operator from the coefficient polynomials.

    The coefficients are twice the entries of the conjugated operator, hence
    the overall factor one half.
    """
    (a, b, c, d), (ap, bp, cp, dp) = l_coefficients(t)
    half = 0.5
    return {
        (0, 0): half * _block_matrix((a, a), (b, b), (c, c), (d, d)),
        (1, 1): half * _block_matrix((b, b), (a, a), (-d, -d), (-c, -c)),
        (0, 1): half / xi * _block_matrix((-ap, ap), (-bp, bp), (-cp, cp), (-dp, dp)),
        (1, 0): half * xi * _block_matrix((-bp, bp), (-ap, ap), (dp, -dp), (cp, -cp)),
    }


def l_gauge(xi) -> np.ndarray:
    """D(xi) x F x F."""
    return kron3(gauge_diag(xi), HADAMARD, HADAMARD)


def conjugate(op: np.ndarray, g: np.ndarray) -> np.ndarray:
    """g op g^-1."""
    return g @ op @ np.linalg.inv(g)


def build_L(triangle, xi=1.0, route: str = "conjugation") -> BlockL:
    """Gauge-transformed operator split into its four free-fermion blocks.

    ``route="conjugation"`` conjugates the vertex operator numerically,
    ``route="closed"`` evaluates the coefficient polynomials.  The two routes
    agree entrywise; :func:`l_route_residual` measures it.
    """
    if xi == 0:
        raise GaugeError("gauge parameter xi must be non-zero")
    tri = _as_triangle(triangle)
    coeffs, primes = l_coefficients(tri.t)
    if route == "conjugation":
        blocks = split_blocks(conjugate(build_R(tri), l_gauge(xi)))
    elif route == "closed":
        blocks = l_blocks_closed_form(tri.t, xi)
    else:
        raise ValueError(f"unknown route {route!r}")
    return BlockL(blocks=blocks, coeffs=coeffs, coeffs_prime=primes, xi=complex(xi))


def l_route_residual(triangle, xi=1.0) -> float:
    direct = build_L(triangle, xi, route="conjugation").matrix
    closed = build_L(triangle, xi, route="closed").matrix
    return float(np.abs(direct - closed).max())


def partial_transpose(M: np.ndarray, spaces) -> np.ndarray:
    """Transpose the operator in each listed space (labels 1..3)."""
    T = np.asarray(M).reshape([2] * 6)
    axes = list(range(6))
    for s in spaces:
        axes[s - 1], axes[s + 2] = axes[s + 2], axes[s - 1]
    return T.transpose(axes).reshape(8, 8)


def _permutation_13() -> np.ndarray:
    P = np.zeros((8, 8))
    for bits in itertools.product((0, 1), repeat=3):
        P[pack(bits), pack(bits[::-1])] = 1.0
    return P


P13 = _permutation_13()


def check_symmetry(triangle) -> tuple[float, float]:
    """Max-abs residuals of the two symmetry generators of the vertex operator.

    First: R(pi - t1, pi - t2, t3) = g R^{T1 T2}(t1, t2, t3) g with
    g = sigma_y x sigma_y x sigma_z.
    Second: P13 R^{T1 T2 T3}(t3, t2, t1) P13 = tau^3 R(t1, t2, t3) tau^-3.
    """
    tri = _as_triangle(triangle)
    t1, t2, t3 = tri.theta
    try:
        flipped = solve_triangle((PI - t1, PI - t2, t3))
        reversed_ = solve_triangle((t3, t2, t1))
    except InvalidTriangleError as exc:
        raise InvalidTriangleError(f"partner triangle invalid: {exc}") from exc
    R = build_R(tri)
    g = kron3(PAULI_Y, PAULI_Y, PAULI_Z)
    first = build_R(flipped) - g @ partial_transpose(R, (1, 2)) @ g
    tau3 = kron3(TAU, TAU, TAU)
    second = P13 @ partial_transpose(build_R(reversed_), (1, 2, 3)) @ P13 - conjugate(R, tau3)
    return float(np.abs(first).max()), float(np.abs(second).max())
