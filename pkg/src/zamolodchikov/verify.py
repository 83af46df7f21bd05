"""Residual engines for the tetrahedron equation and its reductions.

Every check builds both ordered products as dense 64x64 matrices (8x8 for
the algebra relations) and reports the entrywise residual.  Each operator
is divided by its largest entry before multiplying; the identities are
homogeneous in every operator, so this only fixes the scale at which the
absolute tolerance is applied.  The one exception is the structure-constant
operator in the algebra relation, which enters both sides differently and
is never rescaled.
"""
from __future__ import annotations

import itertools
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .elliptic import EllipticContext
from .errors import DomainError
from .geometry import PrismConfig, TetraConfig, vertex_angle_sets
from .param import (
    build_calS,
    calL,
    invert_angles,
    modulus_from_vertex,
    uniform_blocks,
    weight_factors,
)
from .weights import (
    HADAMARD,
    build_R,
    build_S,
    gauge_diag,
    kron3,
    pack,
)

DEFAULT_TOL = 1e-10


def embed(op: np.ndarray, spaces, n: int = 6) -> np.ndarray:
    """Place an operator on the listed spaces (labels 1..n) of an n-fold product.

    ``op`` acts on ``len(spaces)`` two-dimensional factors, ordered as
    listed; it is the identity on the remaining spaces.  Rows stay incoming
    and columns outgoing.
    """
    spaces = [int(s) for s in spaces]
    m = len(spaces)
    if len(set(spaces)) != m:
        raise DomainError(f"space labels must be distinct, got {spaces}")
    if any(not 1 <= s <= n for s in spaces):
        raise DomainError(f"space labels must lie in 1..{n}, got {spaces}")
    op = np.asarray(op)
    if op.shape != (2 ** m, 2 ** m):
        raise DomainError(f"operator of shape {op.shape} does not act on {m} spaces")
    order = [s - 1 for s in spaces] + [s for s in range(n) if s + 1 not in spaces]
    big = np.kron(op, np.eye(2 ** (n - m))).reshape([2] * (2 * n))
    inv = list(np.argsort(order))
    return big.transpose(inv + [n + i for i in inv]).reshape(2 ** n, 2 ** n)


def normalized(op: np.ndarray) -> tuple[np.ndarray, float]:
    scale = float(np.abs(op).max())
    return op / scale, scale


@dataclass
class VerificationReport:
    identity_name: str
    config: dict
    residual_max: float
    residual_fro: float
    tol: float
    passed: bool
    n_components_checked: int
    n_identically_zero: int
    elapsed_ms: float = 0.0
    details: dict = field(default_factory=dict)

    def to_dict(self, timing: bool = True) -> dict:
        out = asdict(self)
        out["pass"] = out.pop("passed")
        if not timing:
            out.pop("elapsed_ms")
        return out


def _product_residual(ops_with_spaces, n: int = 6):
    """LHS = A B C D and RHS = D C B A for the embedded operators."""
    mats = [embed(op, sp, n) for op, sp in ops_with_spaces]
    lhs = mats[0] @ mats[1] @ mats[2] @ mats[3]
    rhs = mats[3] @ mats[2] @ mats[1] @ mats[0]
    return lhs, rhs


def _report(name, config, lhs, rhs, tol, started, details=None) -> VerificationReport:
    diff = lhs - rhs
    res_max = float(np.abs(diff).max())
    zeros = int(np.count_nonzero((lhs == 0) & (rhs == 0)))
    return VerificationReport(
        identity_name=name,
        config=config,
        residual_max=res_max,
        residual_fro=float(np.linalg.norm(diff)),
        tol=float(tol),
        passed=bool(res_max < tol),
        n_components_checked=int(diff.size),
        n_identically_zero=zeros,
        elapsed_ms=(time.perf_counter() - started) * 1e3,
        details=details or {},
    )


TE_SPACES = ((1, 2, 3), (1, 4, 5), (2, 4, 6), (3, 5, 6))


def te_operators(theta6, normalize: bool = True) -> list[np.ndarray]:
    ops = [build_R(s) for s in vertex_angle_sets(theta6)]
    if normalize:
        ops = [normalized(op)[0] for op in ops]
    return ops


def check_TE(config: TetraConfig, tol: float = DEFAULT_TOL, gauge=None) -> VerificationReport:
    """General tetrahedron equation at the angles of ``config``.

    ``gauge`` optionally supplies six invertible 2x2 matrices; every operator
    is conjugated by the product of the matrices of its spaces first.
    """
    started = time.perf_counter()
    ops = te_operators(config.theta6)
    details = {}
    if gauge is not None:
        gauge = [np.asarray(g, dtype=complex) for g in gauge]
        if len(gauge) != 6:
            raise DomainError("gauge needs one 2x2 matrix per space")
        gauged = []
        for op, (i, j, k) in zip(ops, TE_SPACES):
            g = kron3(gauge[i - 1], gauge[j - 1], gauge[k - 1])
            gauged.append(g @ op @ np.linalg.inv(g))
        ops = gauged
        details["gauged"] = True
    lhs, rhs = _product_residual(list(zip(ops, TE_SPACES)))
    return _report("tetrahedron", config.to_dict(), lhs, rhs, tol, started, details)


# ---------------------------------------------------------------- prism

PRISM_SPACES = ((1, 2, 3), (1, 4, 5), (2, 4, 6), (3, 5, 6))
PRISM_PAIRS = ((0, 1), (0, 2), (1, 2))


def prism_operators(u, ctx: EllipticContext):
    """Meromorphic apex operator and three base operators, normalized, with their scales."""
    u1, u2, u3 = u
    apex, s0 = normalized(build_calS(u1, u2, u3, ctx))
    base = [normalized(calL(u[a], u[b], ctx)) for a, b in PRISM_PAIRS]
    return [apex] + [op for op, _ in base], [s0] + [s for _, s in base]


def check_TE2_params(k: float, u, tol: float = DEFAULT_TOL, config: dict | None = None) -> VerificationReport:
    """Prismatic identity at explicit (k, u1, u2, u3); no angle data needed."""
    started = time.perf_counter()
    ctx = EllipticContext.from_modulus(k)
    ops, _ = prism_operators(tuple(complex(x) for x in u), ctx)
    lhs, rhs = _product_residual(list(zip(ops, PRISM_SPACES)))
    cfg = config or {"kind": "prism-params", "k": k, "u": [[complex(x).real, complex(x).imag] for x in u]}
    return _report("prism", cfg, lhs, rhs, tol, started)


def literal_prism_operators(config: PrismConfig):
    """Gauge-transformed vertex operators built from the angles of the prism.

    Returns the four 8x8 operators and the six-space gauge matrix
    D(xi1) x D(xi2) x D(xi3) x F x F x F, with each xi from the t-polynomials
    of its base vertex.
    """
    ctx = EllipticContext.from_modulus(config.k)
    sets = vertex_angle_sets(config.theta6)
    xis = []
    for tri in config.vertex_triangles:
        pair = invert_angles(tri.theta, modulus_from_vertex(tri))
        xis.append(weight_factors(pair, ctx, tri.t).xi)
    D = [gauge_diag(x) for x in xis]
    apex_gauge = kron3(*D)
    ops = [apex_gauge @ build_S(sets[0]) @ np.linalg.inv(apex_gauge)]
    raw = [build_S(sets[0])]
    for tri, d in zip(config.vertex_triangles, D):
        g = kron3(d, HADAMARD, HADAMARD)
        R = build_R(tri)
        raw.append(R)
        ops.append(g @ R @ np.linalg.inv(g))
    G = np.kron(apex_gauge, kron3(HADAMARD, HADAMARD, HADAMARD))
    return ops, raw, G, xis


def check_TE2(config: PrismConfig, tol: float = DEFAULT_TOL, cross_validate: bool = True) -> VerificationReport:
    """Prismatic identity with the meromorphic operators at the lifted u's.

    With ``cross_validate`` the literal tetrahedron equation of the prism
    angles is also conjugated by the six-space gauge matrix and compared:
    ``details`` records the per-operator route differences, the conjugated
    residual and its gap to the direct residual.
    """
    started = time.perf_counter()
    ctx = EllipticContext.from_modulus(config.k)
    ops, scales = prism_operators(config.u_lifted, ctx)
    lhs, rhs = _product_residual(list(zip(ops, PRISM_SPACES)))
    details = {}
    if cross_validate:
        literal, raw, G, xis = literal_prism_operators(config)
        route = [float(np.abs(a / s - b).max()) for a, s, b in zip(literal, scales, ops)]
        lhs_te, rhs_te = _product_residual([(r / s, sp) for r, s, sp in zip(raw, scales, PRISM_SPACES)])
        conj = G @ (lhs_te - rhs_te) @ np.linalg.inv(G)
        direct = lhs - rhs
        details = {
            "operator_route_max": max(route),
            "gauge_te_residual_max": float(np.abs(conj).max()),
            "gauge_vs_direct_max": float(np.abs(conj - direct).max()),
            "xi": [[complex(x).real, complex(x).imag] for x in xis],
        }
    return _report("prism", config.to_dict(), lhs, rhs, tol, started, details)


# ---------------------------------------------------------------- static-elliptic

TE3_SPACES = {
    "145": ((1, 2, 3), (1, 4, 5), (2, 4, 6), (3, 5, 6)),
    "245": ((1, 2, 3), (2, 4, 5), (2, 4, 6), (3, 5, 6)),
}
TE3_ARGS = ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3))


def static_elliptic_operators(u, ctx: EllipticContext) -> list[np.ndarray]:
    return [normalized(build_calS(u[a], u[b], u[c], ctx))[0] for a, b, c in TE3_ARGS]


def check_TE3(k: float, u, tol: float = DEFAULT_TOL, labeling: str = "145") -> VerificationReport:
    """Static-elliptic tetrahedron equation for four parameters u1..u4.

    The second operator carries the arguments (u1, u2, u4).  ``labeling``
    selects its spaces: ``"145"`` follows the space pattern of the general
    equation, ``"245"`` is the alternative reading.  The residual of the
    other labeling is stored in ``details``.
    """
    if labeling not in TE3_SPACES:
        raise DomainError(f"labeling must be one of {sorted(TE3_SPACES)}, got {labeling!r}")
    started = time.perf_counter()
    u = tuple(complex(x) for x in u)
    ctx = EllipticContext.from_modulus(k)
    ops = static_elliptic_operators(u, ctx)
    residuals = {}
    chosen = None
    for name, spaces in TE3_SPACES.items():
        lhs, rhs = _product_residual(list(zip(ops, spaces)))
        residuals[name] = float(np.abs(lhs - rhs).max())
        if name == labeling:
            chosen = (lhs, rhs)
    cfg = {"kind": "static-elliptic", "k": k, "u": [[x.real, x.imag] for x in u], "labeling": labeling}
    return _report("static-elliptic", cfg, *chosen, tol, started, {"labeling_residuals": residuals})


# ---------------------------------------------------------------- tetrahedral algebra

def algebra_matrices(x: complex, y: complex, ctx: EllipticContext, scale: float | None = None):
    """The two 4x4 matrices obtained from the incoming-0 blocks at (x, y)."""
    blocks = uniform_blocks(x, y, ctx)
    if scale is None:
        scale = float(np.abs(calL(x, y, ctx)).max())
    return blocks[(0, 0)] / scale, blocks[(0, 1)] / scale


def algebra_residuals(u, ctx: EllipticContext):
    """LHS - RHS of the algebra relation for all eight (a, b, c), as 8x8 matrices."""
    u1, u2, u3 = u
    R12 = algebra_matrices(u1, u2, ctx)
    R13 = algebra_matrices(u1, u3, ctx)
    R23 = algebra_matrices(u2, u3, ctx)
    S = build_calS(u1, u2, u3, ctx)
    E12 = [embed(m, (1, 2), 3) for m in R12]
    E13 = [embed(m, (1, 3), 3) for m in R13]
    E23 = [embed(m, (2, 3), 3) for m in R23]
    out = {}
    for a, b, c in itertools.product((0, 1), repeat=3):
        lhs = E12[a] @ E13[b] @ E23[c]
        rhs = np.zeros_like(lhs)
        for d, e, f in itertools.product((0, 1), repeat=3):
            coeff = S[pack((d, e, f)), pack((a, b, c))]
            if coeff != 0:
                rhs = rhs + coeff * (E23[f] @ E13[e] @ E12[d])
        out[(a, b, c)] = (lhs, rhs)
    return out


def check_TZA(k: float, u, tol: float = DEFAULT_TOL, slice_check: bool = True) -> VerificationReport:
    """Tetrahedral Zamolodchikov algebra for (u1, u2, u3).

    Reports the worst residual over the eight index patterns.  With
    ``slice_check`` the prismatic identity at the same parameters is formed
    and its block with incoming (0, 0, 0) and outgoing (a, b, c) on the
    first three spaces is compared with the algebra residual.
    """
    started = time.perf_counter()
    u = tuple(complex(x) for x in u)
    ctx = EllipticContext.from_modulus(k)
    pieces = algebra_residuals(u, ctx)
    lhs = np.stack([p[0] for p in pieces.values()])
    rhs = np.stack([p[1] for p in pieces.values()])
    per_pattern = {"".join(map(str, key)): float(np.abs(l - r).max()) for key, (l, r) in pieces.items()}
    details = {"pattern_residuals": per_pattern}
    if slice_check:
        u1, u2, u3 = u
        base = [normalized(calL(u[a], u[b], ctx))[0] for a, b in PRISM_PAIRS]
        ops = [build_calS(u1, u2, u3, ctx)] + base
        big_l, big_r = _product_residual(list(zip(ops, PRISM_SPACES)))
        diff = big_l - big_r
        gap = 0.0
        for key, (l, r) in pieces.items():
            col = pack(key)
            block = diff[0:8, 8 * col:8 * col + 8]
            gap = max(gap, float(np.abs(block - (l - r)).max()))
        details["slice_gap"] = gap
    cfg = {"kind": "tza", "k": k, "u": [[x.real, x.imag] for x in u]}
    return _report("tetrahedral-algebra", cfg, lhs, rhs, tol, started, details)
