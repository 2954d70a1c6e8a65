"""Time integration of the covariant Euler system and Lagrangian markers."""

from .euler import Rates, SolverConfig, check_cfl, euler_rhs, grid_ops, stable_dt, step
from .markers import (
    CURVE,
    DOMAIN_BOUNDARY,
    DOMAIN_INTERIOR,
    MarkerSet,
    advect_markers,
    check_clearance,
    circle_curve,
    interpolate,
    is_simple_polyline,
    polygon_boundary,
    rectangle_domain,
    segment_curve,
    signed_area,
)
from .run import Snapshot, simulate
from .stencils import GridOps, partial

__all__ = [name for name in dir() if not name.startswith("_")]
