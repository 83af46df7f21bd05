"""Spherical trigonometry of a vertex and seeded angle configurations.

Three planes through a point cut the unit sphere in a spherical triangle
whose angles are the dihedral angles ``theta``.  Everything the vertex
weights need (sides, excesses, the ``t`` variables) is derived here.

Tetrahedron angle convention
----------------------------
For a Euclidean tetrahedron with faces 1..4 and internal dihedral angles
``phi_ij`` between faces i and j, the six spectral angles are::

    theta1 = phi_12      theta2 = phi_13      theta3 = phi_23
    theta4 = pi - phi_14 theta5 = pi - phi_24 theta6 = phi_34

and the four vertices carry the angle triples
``(theta1, theta2, theta3)``, ``(theta1, theta4, theta5)``,
``(pi - theta2, theta4, theta6)`` and ``(theta3, pi - theta5, theta6)``.
With this convention the Gram determinant that vanishes is the one built
from ``(cos t1, -cos t2, cos t3, -cos t4, cos t5, cos t6)``; see
:func:`gram_matrix`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConstraintError, ExhaustionError, InvalidTriangleError, ZamolodchikovError

__all__ = [
    "DEFAULT_MARGIN",
    "SphericalTriangle",
    "TetraConfig",
    "PrismConfig",
    "StaticConfig",
    "solve_triangle",
    "excess_constraint",
    "vertex_angle_sets",
    "gram_matrix",
    "gram_residual",
    "angles_from_normals",
    "random_tetrahedron",
    "random_prism",
    "random_static",
    "static_from_free",
]

PI = math.pi
DEFAULT_MARGIN = 1e-6


@dataclass(frozen=True)
class SphericalTriangle:
    """Spherical triangle with angles ``theta`` and opposite sides ``sides``."""

    theta: tuple[float, float, float]
    sides: tuple[float, float, float]
    sine_K: float
    alpha: tuple[float, float, float, float]
    beta: tuple[float, float, float, float]
    t: tuple[float, float, float, float]

    @property
    def sine_ratios(self) -> np.ndarray:
        return np.sin(self.theta) / np.sin(self.sides)

    @property
    def constraint_residual(self) -> float:
        return excess_constraint(self.t)

    def tan_half(self, which: str = "alpha") -> np.ndarray:
        return np.tan(0.5 * np.asarray(getattr(self, which)))


def excess_constraint(t) -> float:
    """Polynomial that vanishes when the four excesses sum to pi."""
    t0, t1, t2, t3 = (x * x for x in t)
    return (1.0 - t0 * t1 - t0 * t2 - t0 * t3 - t1 * t2 - t1 * t3 - t2 * t3
            + t0 * t1 * t2 * t3)


def solve_triangle(theta, margin: float = DEFAULT_MARGIN) -> SphericalTriangle:
    """Sides, excesses and t-values of the spherical triangle with angles ``theta``.

    Sides follow from the polar cosine rule
    ``cos a_i = (cos theta_i + cos theta_j cos theta_k) / (sin theta_j sin theta_k)``.
    Every angle, excess and beta must lie in ``(margin, pi - margin)``.
    """
    th = np.asarray(theta, dtype=float)
    if th.shape != (3,):
        raise InvalidTriangleError(f"need three angles, got shape {th.shape}")
    if np.any(th <= margin) or np.any(th >= PI - margin):
        raise InvalidTriangleError(f"angles {th.tolist()} not inside (0, pi)")
    cos_t, sin_t = np.cos(th), np.sin(th)
    cos_a = np.empty(3)
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        cos_a[i] = (cos_t[i] + cos_t[j] * cos_t[k]) / (sin_t[j] * sin_t[k])
    if np.any(np.abs(cos_a) >= 1.0):
        raise InvalidTriangleError(f"angles {th.tolist()} give side cosines {cos_a.tolist()}")
    sides = np.arccos(cos_a)

    alpha0 = 0.5 * (th.sum() - PI)
    alpha = np.concatenate([[alpha0], th - alpha0])
    beta0 = 0.5 * (2.0 * PI - sides.sum())
    beta = np.concatenate([[beta0], PI - sides - beta0])
    for name, vals in (("alpha", alpha), ("beta", beta)):
        if np.any(vals <= margin) or np.any(vals >= PI - margin):
            raise InvalidTriangleError(f"{name} = {vals.tolist()} leaves (0, pi) for angles {th.tolist()}")

    t = np.sqrt(np.tan(0.5 * alpha))
    sine_K = float(np.mean(np.sin(th) / np.sin(sides)))
    return SphericalTriangle(
        theta=tuple(th.tolist()),
        sides=tuple(sides.tolist()),
        sine_K=sine_K,
        alpha=tuple(alpha.tolist()),
        beta=tuple(beta.tolist()),
        t=tuple(t.tolist()),
    )


def vertex_angle_sets(theta6) -> list[tuple[float, float, float]]:
    """Angle triples of the four vertices, in the order (123), (145), (246), (356)."""
    t1, t2, t3, t4, t5, t6 = (float(x) for x in theta6)
    return [(t1, t2, t3), (t1, t4, t5), (PI - t2, t4, t6), (t3, PI - t5, t6)]


_PAIRS = ((0, 1), (0, 2), (1, 2), (0, 3), (1, 3), (2, 3))
_SIGNS = {
    "tetrahedron": (1, -1, 1, -1, 1, 1),
    "printed": (1, 1, 1, -1, -1, 1),
}


def gram_matrix(theta6, convention: str = "tetrahedron") -> np.ndarray:
    """4x4 Gram matrix of plane normals, entries ``sign * cos(theta)``.

    ``convention="tetrahedron"`` is the sign pattern that vanishes on the
    angle sets for which the vertex weights satisfy the tetrahedron equation.
    ``convention="printed"`` places ``-cos`` on theta4 and theta5 only; it
    equals the tetrahedron pattern evaluated at
    ``(t1, pi - t2, t3, t4, pi - t5, t6)``.
    """
    try:
        signs = _SIGNS[convention]
    except KeyError:
        raise ValueError(f"unknown Gram convention {convention!r}") from None
    c = np.cos(np.asarray(theta6, dtype=float))
    G = np.eye(4)
    for (i, j), s, ci in zip(_PAIRS, signs, c):
        G[i, j] = G[j, i] = s * ci
    return G


def gram_residual(theta6, convention: str = "tetrahedron") -> float:
    return float(np.linalg.det(gram_matrix(theta6, convention)))


def angles_from_normals(normals) -> np.ndarray:
    """Six spectral angles from four outward unit face normals.

    Inverse of :func:`gram_matrix` (tetrahedron convention): the Gram matrix
    of ``(n1, -n2, n3, -n4)`` is read off entrywise.
    """
    n = np.asarray(normals, dtype=float)
    m = n * np.array([1.0, -1.0, 1.0, -1.0])[:, None]
    G = m @ m.T
    signs = _SIGNS["tetrahedron"]
    cosines = [s * G[i, j] for (i, j), s in zip(_PAIRS, signs)]
    return np.arccos(np.clip(cosines, -1.0, 1.0))


def _outward(normals: np.ndarray) -> np.ndarray | None:
    """Flip normals so the linear dependency sum c_i n_i = 0 has c_i > 0."""
    _, s, vh = np.linalg.svd(normals.T)
    # a one-dimensional dependency needs rank = (number of normals) - 1
    if s[normals.shape[0] - 2] < 1e-8 * s[0]:
        return None
    c = vh[-1]
    if np.any(np.abs(c) < 1e-8):
        return None
    return normals * np.sign(c)[:, None]


@dataclass(frozen=True)
class TetraConfig:
    theta6: tuple[float, ...]
    gram_residual: float
    vertex_triangles: tuple[SphericalTriangle, ...]
    seed: int | None = None

    @property
    def vertex_angles(self) -> list[tuple[float, float, float]]:
        return vertex_angle_sets(self.theta6)

    def to_dict(self) -> dict:
        return {"kind": "tetrahedron", "seed": self.seed, "theta": list(self.theta6)}


def _triangles_or_none(theta6, margin, skip_apex=False):
    sets = vertex_angle_sets(theta6)[1 if skip_apex else 0:]
    try:
        return tuple(solve_triangle(s, margin) for s in sets)
    except InvalidTriangleError:
        return None


def tetra_config(theta6, margin: float = DEFAULT_MARGIN, seed=None) -> TetraConfig:
    """Validate six angles as a tetrahedron configuration."""
    theta6 = tuple(float(x) for x in theta6)
    triangles = tuple(solve_triangle(s, margin) for s in vertex_angle_sets(theta6))
    return TetraConfig(theta6, gram_residual(theta6), triangles, seed)


def _unit_rows(x: np.ndarray) -> np.ndarray:
    return x / np.linalg.norm(x, axis=-1, keepdims=True)


def random_tetrahedron(seed: int, max_tries: int = 1000,
                       margin: float = DEFAULT_MARGIN) -> TetraConfig:
    """Sample four face normals in general position and derive a TetraConfig.

    Deterministic per ``seed``.  Degenerate draws (parallel or coplanar
    normals, invalid vertex triangles) are rejected and resampled.
    """
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        normals = _outward(_unit_rows(rng.normal(size=(4, 3))))
        if normals is None:
            continue
        theta6 = angles_from_normals(normals)
        triangles = _triangles_or_none(theta6, margin)
        if triangles is None:
            continue
        theta6 = tuple(theta6.tolist())
        return TetraConfig(theta6, gram_residual(theta6), triangles, seed)
    raise ExhaustionError(f"no valid tetrahedron after {max_tries} draws (seed={seed})")


@dataclass(frozen=True)
class PrismConfig:
    """Prism angles with the elliptic parameters of the three base vertices.

    ``u`` holds u1, u2, u3 reduced into the periodicity rectangle.
    ``u_lifted`` holds the same points shifted by multiples of 2K so that
    Re(u1 - u2), Re(u1 - u3) and Re(u2 - u3) all lie in (0, 2K); with these
    representatives the meromorphic operators coincide with the literal
    gauge transforms of the vertex weights.
    """

    theta6: tuple[float, ...]
    k: float
    phi: float
    u: tuple[complex, complex, complex]
    u_lifted: tuple[complex, complex, complex]
    vertex_moduli: tuple[float, float, float]
    vertex_triangles: tuple[SphericalTriangle, ...]
    seed: int | None = None

    @property
    def vertex_angles(self) -> list[tuple[float, float, float]]:
        return vertex_angle_sets(self.theta6)

    def to_dict(self) -> dict:
        return {
            "kind": "prism",
            "seed": self.seed,
            "theta": list(self.theta6),
            "k": self.k,
            "phi": self.phi,
            "u": [[z.real, z.imag] for z in self.u],
            "u_lifted": [[z.real, z.imag] for z in self.u_lifted],
        }


def _prism_angles(rng: np.random.Generator) -> np.ndarray | None:
    v = _unit_rows(rng.normal(size=3))
    basis = np.linalg.svd(v[None, :])[2][1:]
    ang = rng.uniform(0.0, 2.0 * PI, size=3)
    side = np.cos(ang)[:, None] * basis[0] + np.sin(ang)[:, None] * basis[1]
    side = _outward(side)
    if side is None:
        return None
    base = _unit_rows(rng.normal(size=3))
    # base face normal points away from the apex at infinity along v
    base = -np.sign(base @ v) * base
    return angles_from_normals(np.vstack([side, base]))


def random_prism(seed: int, max_tries: int = 1000, margin: float = 0.02,
                 k_range: tuple[float, float] = (1e-3, 0.95)) -> PrismConfig:
    """Sample a triangular prism and solve for its elliptic parameters.

    Three side planes share the direction ``v``; a fourth base plane closes
    the prism.  The vertex (123) sits at infinity so theta1 + theta2 + theta3
    equals pi.  Draws with any angle within ``margin`` of 0 or pi, or with
    modulus outside ``k_range``, are resampled: near-degenerate prisms make
    the weights and the Newton inversion ill-conditioned.
    """
    from .param import invert_prism

    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        theta6 = _prism_angles(rng)
        if theta6 is None:
            continue
        if np.any(theta6 <= margin) or np.any(theta6 >= PI - margin):
            continue
        # the apex vertex is degenerate (angle sum pi): check the three base vertices only
        base = _triangles_or_none(theta6, margin, skip_apex=True)
        if base is None:
            continue
        theta6 = tuple(theta6.tolist())
        try:
            result = invert_prism(theta6, base)
        except (ZamolodchikovError, ArithmeticError):
            continue
        if not (k_range[0] <= result.k <= k_range[1]):
            continue
        return PrismConfig(
            theta6=theta6,
            k=result.k,
            phi=result.phi,
            u=result.u,
            u_lifted=result.u_lifted,
            vertex_moduli=result.vertex_moduli,
            vertex_triangles=base,
            seed=seed,
        )
    raise ExhaustionError(f"no valid prism after {max_tries} draws (seed={seed})")


@dataclass(frozen=True)
class StaticConfig:
    theta6: tuple[float, ...]
    seed: int | None = None

    @property
    def vertex_angles(self) -> list[tuple[float, float, float]]:
        return vertex_angle_sets(self.theta6)

    @property
    def constraint_residuals(self) -> np.ndarray:
        t1, t2, t3, t4, t5, t6 = self.theta6
        return np.array([t1 + t2 + t3 - PI, t1 + t4 + t5 - PI, t4 + t6 - t2, t3 + t6 - t5])

    def to_dict(self) -> dict:
        return {"kind": "static", "seed": self.seed, "theta": list(self.theta6)}


def static_from_free(theta1: float, theta2: float, theta4: float,
                     margin: float = DEFAULT_MARGIN) -> StaticConfig:
    """Solve the four static constraints for theta3, theta5, theta6."""
    theta1, theta2, theta4 = float(theta1), float(theta2), float(theta4)
    theta3 = PI - theta1 - theta2
    theta5 = PI - theta1 - theta4
    theta6 = theta2 - theta4
    theta6_all = (theta1, theta2, theta3, theta4, theta5, theta6)
    for triple in vertex_angle_sets(theta6_all):
        if min(triple) <= margin or max(triple) >= PI - margin:
            raise ConstraintError(f"static angles {theta6_all} leave (0, pi)")
    return StaticConfig(theta6_all)


def random_static(seed: int, max_tries: int = 1000,
                  margin: float = DEFAULT_MARGIN) -> StaticConfig:
    """Sample theta1, theta2, theta4 and complete them to a static configuration."""
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        t1, t2, t4 = rng.uniform(0.0, PI, size=3)
        try:
            cfg = static_from_free(t1, t2, t4, margin)
        except ConstraintError:
            continue
        return StaticConfig(cfg.theta6, seed)
    raise ExhaustionError(f"no valid static configuration after {max_tries} draws (seed={seed})")
