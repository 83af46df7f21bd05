"""Complete elliptic integrals and Jacobi elliptic functions.

The modulus ``k`` is real with ``0 <= k < 1``; arguments may be complex.
Real-argument values come from the descending Landen transformation driven
by the arithmetic-geometric mean (AGM).  Complex arguments are assembled
from real-argument values at modulus ``k`` and at the complementary modulus
``k'`` through Jacobi's imaginary transformation, which keeps the result
uniformly accurate over the whole period rectangle.

All array-valued helpers broadcast over numpy arrays; scalar input gives
scalar output.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, PoleError

__all__ = [
    "DEFAULT_POLE_THRESHOLD",
    "EllipticContext",
    "JacobiValues",
    "ComplexPoint",
    "agm",
    "complete_K",
    "jacobi",
    "jacobi_array",
    "add_arguments",
    "normalize",
    "restore",
]

DEFAULT_POLE_THRESHOLD = 1e-10

_EPS = np.finfo(float).eps


def agm(a: float, b: float) -> float:
    """Arithmetic-geometric mean of two non-negative reals."""
    if a < 0 or b < 0:
        raise DomainError(f"agm needs non-negative inputs, got {a!r}, {b!r}")
    for _ in range(64):
        if abs(a - b) <= _EPS * a:
            break
        a, b = 0.5 * (a + b), math.sqrt(a * b)
    return 0.5 * (a + b)


def _check_modulus(k: float) -> float:
    k = float(k)
    if not (0.0 <= k < 1.0) or math.isnan(k):
        raise DomainError(f"modulus must satisfy 0 <= k < 1, got {k!r}")
    return k


def complete_K(k: float) -> float:
    """Complete elliptic integral of the first kind, K(k) = pi / (2 AGM(1, k'))."""
    k = _check_modulus(k)
    if k == 0.0:
        return math.pi / 2
    return math.pi / (2.0 * agm(1.0, _complement(k)))


def _complement(k: float) -> float:
    # (1-k)(1+k) avoids cancellation in 1 - k*k for k close to 1
    return math.sqrt((1.0 - k) * (1.0 + k))


@dataclass(frozen=True)
class EllipticContext:
    """Modulus together with its complement and both quarter periods.

    ``big_K_prime`` is ``inf`` in the trigonometric limit ``k = 0``.
    """

    k: float
    k_prime: float
    big_K: float
    big_K_prime: float

    @classmethod
    def from_modulus(cls, k: float) -> EllipticContext:
        k = _check_modulus(k)
        kp = _complement(k)
        big_K = complete_K(k)
        big_K_prime = math.inf if k == 0.0 else math.pi / (2.0 * agm(1.0, k))
        return cls(k=k, k_prime=kp, big_K=big_K, big_K_prime=big_K_prime)

    @property
    def trigonometric(self) -> bool:
        return self.k == 0.0


@lru_cache(maxsize=256)
def _landen(m_root: float) -> tuple[tuple[float, ...], tuple[float, ...]]:
    """AGM sequences (a_n, c_n) for modulus ``m_root`` (0 < m_root < 1)."""
    a, b, c = 1.0, _complement(m_root), m_root
    A, C = [a], [c]
    for _ in range(64):
        if abs(c) <= _EPS * a:
            break
        a, b, c = 0.5 * (a + b), math.sqrt(a * b), 0.5 * (a - b)
        A.append(a)
        C.append(c)
    return tuple(A), tuple(C)


def _jacobi_real(u: np.ndarray, k: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """sn, cn, dn for real arguments and 0 <= k <= 1."""
    u = np.asarray(u, dtype=float)
    if k == 0.0:
        return np.sin(u), np.cos(u), np.ones_like(u)
    if k == 1.0:
        sech = 1.0 / np.cosh(u)
        return np.tanh(u), sech, sech
    A, C = _landen(k)
    n = len(A) - 1
    # sn and cn have real period 4K; reducing first keeps 2**n * a_n * u small
    period = 2.0 * math.pi / A[-1]
    u = u - period * np.round(u / period)
    phi = (2.0**n) * A[-1] * u
    for j in range(n, 0, -1):
        phi = 0.5 * (phi + np.arcsin(C[j] / A[j] * np.sin(phi)))
    sn = np.sin(phi)
    cn = np.cos(phi)
    # dn >= k' > 0 on the real line, so the square root is well conditioned
    dn = np.sqrt(1.0 - k * k * sn * sn)
    return sn, cn, dn


def jacobi_array(w, k: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Unchecked (sn, cn, dn) of complex ``w`` broadcasting over arrays.

    No pole detection is performed; this is the workhorse for vectorised
    callers that do their own guarding.
    """
    w = np.asarray(w, dtype=complex)
    x, y = w.real, w.imag
    s, c, d = _jacobi_real(x, k)
    if not np.any(y):
        return s.astype(complex), c.astype(complex), d.astype(complex)
    s1, c1, d1 = _jacobi_real(y, _complement(k) if k else 1.0)
    den = c1 * c1 + (k * k) * (s * s) * (s1 * s1)
    with np.errstate(divide="ignore", invalid="ignore"):
        sn = (s * d1 + 1j * (c * d) * (s1 * c1)) / den
        cn = (c * c1 - 1j * (s * d) * (s1 * d1)) / den
        dn = (d * c1 * d1 - 1j * (k * k) * (s * c) * s1) / den
    return sn, cn, dn


def _pole_denominator(w, k: float) -> np.ndarray:
    w = np.asarray(w, dtype=complex)
    s, _, _ = _jacobi_real(w.real, k)
    if not np.any(w.imag):
        return np.ones_like(w.real)
    s1, c1, _ = _jacobi_real(w.imag, _complement(k) if k else 1.0)
    return c1 * c1 + (k * k) * (s * s) * (s1 * s1)


@dataclass(frozen=True)
class JacobiValues:
    """sn, cn, dn at one point; iterates as ``(sn, cn, dn)``.

    ``cd`` and ``sd`` divide by ``dn`` and raise :class:`PoleError` when
    ``|dn|`` is below the pole threshold.
    """

    sn: complex
    cn: complex
    dn: complex
    w: complex = 0j
    pole_threshold: float = DEFAULT_POLE_THRESHOLD

    def __iter__(self):
        return iter((self.sn, self.cn, self.dn))

    def _over_dn(self, num: complex, name: str) -> complex:
        if abs(self.dn) < self.pole_threshold:
            raise PoleError(f"{name} has a pole: |dn({self.w})| = {abs(self.dn):.3e}", where=self.w)
        return num / self.dn

    @property
    def cd(self) -> complex:
        return self._over_dn(self.cn, "cd")

    @property
    def sd(self) -> complex:
        return self._over_dn(self.sn, "sd")


def jacobi(w: complex, ctx: EllipticContext,
           pole_threshold: float = DEFAULT_POLE_THRESHOLD) -> JacobiValues:
    """Jacobi sn, cn, dn of complex ``w`` at the modulus of ``ctx``."""
    w = complex(w)
    if not (math.isfinite(w.real) and math.isfinite(w.imag)):
        raise DomainError(f"argument must be finite, got {w!r}")
    den = float(_pole_denominator(w, ctx.k))
    if abs(den) < pole_threshold:
        raise PoleError(f"sn, cn, dn have a pole at w = {w}", where=w)
    sn, cn, dn = (complex(v) for v in jacobi_array(w, ctx.k))
    return JacobiValues(sn, cn, dn, w=w, pole_threshold=pole_threshold)


def add_arguments(a, b, k: float):
    """Addition theorem: (sn, cn, dn) of u + v from the values at u and v."""
    s1, c1, d1 = a
    s2, c2, d2 = b
    den = 1.0 - k * k * s1 * s1 * s2 * s2
    return (
        (s1 * c2 * d2 + s2 * c1 * d1) / den,
        (c1 * c2 - s1 * s2 * d1 * d2) / den,
        (d1 * d2 - k * k * s1 * s2 * c1 * c2) / den,
    )


@dataclass(frozen=True)
class ComplexPoint:
    """A point reduced into the rectangle [0, 2K) x [0, K'/2).

    ``w`` is the reduced point and ``original`` the input; ``real_shifts``
    counts the 2K translations and ``imag_shifts`` the iK'/2 translations
    separating them, i.e. ``original = w + 2K*real_shifts + i*K'/2*imag_shifts``.
    An odd ``imag_shifts`` means the angle relation ``e^{i theta} = F(w)``
    holds at the reduced point with ``theta`` replaced by ``-theta``.
    """

    w: complex
    original: complex
    real_shifts: int
    imag_shifts: int
    normalized: bool = True

    @property
    def sn_sign(self) -> int:
        """Sign picked up by sn and cn under the real translations."""
        return -1 if self.real_shifts % 2 else 1


def normalize(w: complex, ctx: EllipticContext) -> ComplexPoint:
    """Reduce ``w`` modulo 2K and iK'/2 into the half-open fundamental rectangle.

    In the trigonometric limit (K' infinite) only the real part is reduced.
    """
    w = complex(w)
    two_K = 2.0 * ctx.big_K
    n = math.floor(w.real / two_K)
    x = w.real - n * two_K
    if x >= two_K:
        x -= two_K
        n += 1
    y = w.imag
    m = 0
    if math.isfinite(ctx.big_K_prime):
        half = 0.5 * ctx.big_K_prime
        m = math.floor(y / half)
        y = y - m * half
        if y >= half:
            y -= half
            m += 1
    return ComplexPoint(w=complex(x, y), original=w, real_shifts=n, imag_shifts=m)


def restore(point: ComplexPoint, values, ctx: EllipticContext):
    """Map (sn, cn, dn) at ``point.w`` to the values at ``point.original``.

    Uses sn(w + 2K) = -sn w, cn(w + 2K) = -cn w, dn(w + 2K) = dn w, the
    half-period addition with sn(iK'/2) = i/sqrt(k), and the iK' rules
    sn(w + iK') = 1/(k sn w), cn(w + iK') = -i dn w / (k sn w),
    dn(w + iK') = -i cn w / sn w.
    """
    k = ctx.k
    sn, cn, dn = (complex(v) for v in values)
    q, r = divmod(point.imag_shifts, 2)
    if r:
        half = (1j / math.sqrt(k), math.sqrt((1.0 + k) / k), math.sqrt(1.0 + k))
        sn, cn, dn = add_arguments((sn, cn, dn), half, k)
    q %= 4
    if q >= 2:
        # w + 2iK': sn unchanged, cn and dn flip sign
        cn, dn = -cn, -dn
        q -= 2
    if q:
        sn, cn, dn = 1.0 / (k * sn), -1j * dn / (k * sn), -1j * cn / sn
    if point.real_shifts % 2:
        sn, cn = -sn, -cn
    return sn, cn, dn
