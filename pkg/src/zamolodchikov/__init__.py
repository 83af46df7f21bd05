"""Numerical verification of the Zamolodchikov tetrahedron equation and its reductions.

The package builds the 8x8 vertex operators from dihedral angles, maps
angles to points on an elliptic curve, and checks the tetrahedron
equation, its prismatic and static-elliptic forms and the tetrahedral
Zamolodchikov algebra as dense matrix identities.
"""
from .elliptic import EllipticContext, complete_K, jacobi
from .errors import (
    AmbiguityError,
    ConstraintError,
    DomainError,
    ExhaustionError,
    GaugeError,
    InvalidTriangleError,
    InversionError,
    NoConvergenceError,
    PoleError,
    ZamolodchikovError,
)
from .geometry import (
    PrismConfig,
    SphericalTriangle,
    StaticConfig,
    TetraConfig,
    gram_residual,
    random_prism,
    random_static,
    random_tetrahedron,
    solve_triangle,
)
from .param import (
    build_calS,
    build_Rffm,
    build_uniform_L,
    invert_angles,
    korepanov_map,
    modulus_from_vertex,
    t_from_w,
    weight_factors,
)
from .verify import VerificationReport, check_TE, check_TE2, check_TE3, check_TZA, embed
from .weights import BlockL, build_L, build_R, build_S, check_symmetry

__version__ = "0.1.0"
