"""Exact-rational fan and simplex categories with sequence builds and
verification experiments for their dense-end-point limits."""

from .rationals import INFINITY, Distance, fmt_rat, parse_rat
from .fans import (
    EndPoint,
    FanArrow,
    FanPoint,
    FiniteFan,
    TriangularDecomposition,
    amalgamate_fans,
    cantor_x,
    compose_fan_arrows,
    counterexample_g,
    counterexample_lift,
    fan_arrow_distance,
    fan_distance,
    identity_arrow,
    level_preserving_retraction,
    skeleton_normalize_step,
    swap_homeomorphism,
    triangular_decomposition,
    validate_arrow,
)
from .simplices import (
    BPoint,
    Simplex,
    SimplexArrow,
    amalgamate_simplices,
    apply_projection,
    bary,
    compose_simplex_arrows,
    enumerate_rational_arrows,
    identity_simplex_arrow,
    right_inverse,
    simplex_arrow_distance,
    simplex_arrow_distance_l1,
    validate_simplex_arrow,
)
from .core import (
    InvariantError,
    InverseSequence,
    TaskEntry,
    TaskLog,
    arrow_distance,
    back_and_forth,
    check_fraisse_condition,
    check_metric_category,
    fraisse_failures,
)
from .categories import FAN, FAN_PAIRED, SIMPLEX, get_category
from .engine import (
    BuildReport,
    DenseFamilyConfig,
    build_fraisse_sequence,
    canonical_arrow_into,
    density_gap_curve,
    density_report,
    endpoint_swap_iso,
    homogeneity_iso,
    limit_thread,
)
from .jsonio import bundle_to_json, load_bundle, save_bundle

__all__ = [name for name in dir() if not name.startswith("_")]

__version__ = "0.1.0"
