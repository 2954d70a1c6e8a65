"""Pointwise densities and fluxes, moving-domain integrals, boundary fluxes and circulation."""

from __future__ import annotations

import numpy as np

from ..errors import GeometryError
from ..fluid.eos import Eos
from ..fluid.state import FluidState
from ..manifold.chart import ChartMetric, GeometryEval, geometry
from ..solver.euler import euler_rhs, grid_ops
from ..solver.markers import CURVE, DOMAIN_BOUNDARY, DOMAIN_INTERIOR, MarkerSet, interpolate, signed_area
from .densities import DensityExpression, DensitySpec, FluxExpression, validate_spec

_VALIDATED: dict = {}


def ensure_compatible(spec: DensitySpec, chart: ChartMetric, eos: Eos) -> None:
    """Cached classification check (raises ``ClassificationError``)."""
    key = (spec, chart, eos)
    try:
        hit = key in _VALIDATED
    except TypeError:
        hit = False
        key = None
    if hit:
        return
    validate_spec(spec, chart, eos)
    if key is not None:
        _VALIDATED[key] = True


def _expr(spec):
    return spec.expression() if isinstance(spec, DensitySpec) else spec


def _flux(spec):
    return spec.flux() if isinstance(spec, DensitySpec) else spec


def density_value(spec, t, x, u, rho, S, geom: GeometryEval, eos: Eos, chart: ChartMetric, check: bool = True):
    """Pointwise conserved density T (batched over leading axes)."""
    if check and isinstance(spec, DensitySpec):
        ensure_compatible(spec, chart, eos)
    return _expr(spec).partials(t, x, geom, chart, u, rho, S, eos).T


def flux_vector(spec, t, x, u, rho, S, geom: GeometryEval, eos: Eos, chart: ChartMetric, check: bool = True):
    """Moving flux ``Phi^i`` (upper index)."""
    if check and isinstance(spec, DensitySpec):
        ensure_compatible(spec, chart, eos)
    return _flux(spec).partials(t, x, geom, chart, u, rho, S, eos).Phi


def sample_state(state: FluidState, x: np.ndarray):
    """Interpolated ``(x_wrapped, geom, u, rho, S)`` at chart points."""
    grid = state.grid
    xw = grid.chart.wrap(x)
    geom = geometry(grid.chart, xw, curvature=False, check=False)
    return xw, geom, interpolate(state.u, grid, xw), interpolate(state.rho, grid, xw), interpolate(state.S, grid, xw)


def domain_integral(markers: MarkerSet, spec, state: FluidState, eos: Eos, check: bool = True) -> float:
    """``sum_k T(x_k) w_k`` over an interior marker cloud."""
    if markers.kind != DOMAIN_INTERIOR:
        raise GeometryError("domain_integral needs interior markers")
    if len(markers) == 0:
        raise GeometryError("empty marker set")
    xw, geom, u, rho, S = sample_state(state, markers.positions)
    T = density_value(spec, state.t, xw, u, rho, S, geom, eos, state.grid.chart, check)
    return float(np.sum(T * markers.weights))


def _segments_cross_any(p: np.ndarray) -> bool:
    """Vectorised test for crossings between non-adjacent segments of a closed polyline."""
    a = p
    b = np.roll(p, -1, axis=0)
    m = len(p)

    def orient(P, Q, R):
        return (Q[..., 0] - P[..., 0]) * (R[..., 1] - P[..., 1]) - (Q[..., 1] - P[..., 1]) * (R[..., 0] - P[..., 0])

    A1, A2 = a[:, None, :], b[:, None, :]
    B1, B2 = a[None, :, :], b[None, :, :]
    d1 = orient(B1, B2, A1)
    d2 = orient(B1, B2, A2)
    d3 = orient(A1, A2, B1)
    d4 = orient(A1, A2, B2)
    cross = (d1 * d2 < 0) & (d3 * d4 < 0)
    i, j = np.indices((m, m))
    adjacent = (np.abs(i - j) <= 1) | (np.abs(i - j) == m - 1)
    return bool(np.any(cross & ~adjacent))


def boundary_flux(boundary: MarkerSet, spec, state: FluidState, eos: Eos, check: bool = True, check_simple: bool = True) -> float:
    """Outward flux ``int g(Phi, nu) dA`` through a closed boundary polyline (n = 2).

    For a segment with chart displacement ``d`` the outward normal times the
    arc element is the metric rotation of ``d``; contracted with ``Phi`` this
    gives ``sqrt(g) (Phi^1 d^2 - Phi^2 d^1)``.  Orientation is read from the
    shoelace sign, so clockwise input is handled too.
    """
    if boundary.kind != DOMAIN_BOUNDARY or not boundary.closed:
        raise GeometryError("boundary_flux needs a closed boundary polyline")
    if state.grid.dim != 2:
        raise GeometryError("boundary_flux is implemented for n = 2")
    poly = boundary.polyline
    if check_simple and _segments_cross_any(poly):
        raise GeometryError("boundary polyline is self-intersecting")
    a, b = boundary.segments()
    mid = 0.5 * (a + b)
    d = b - a
    xw, geom, u, rho, S = sample_state(state, mid)
    Phi = flux_vector(spec, state.t, xw, u, rho, S, geom, eos, state.grid.chart, check)
    orientation = 1.0 if signed_area(poly) >= 0 else -1.0
    per_seg = geom.sqrt_det_g * (Phi[:, 0] * d[:, 1] - Phi[:, 1] * d[:, 0])
    return orientation * float(np.sum(per_seg))


def circulation(curve: MarkerSet, state: FluidState) -> float:
    """Midpoint-rule line integral of the velocity one-form ``sum g(u, dx)``."""
    if curve.kind not in (CURVE, DOMAIN_BOUNDARY):
        raise GeometryError("circulation needs a curve")
    a, b = curve.segments()
    d = b - a
    if np.all(np.abs(d) == 0):
        raise GeometryError("degenerate (zero-length) curve")
    xw, geom, u, _, _ = sample_state(state, 0.5 * (a + b))
    return float(np.sum(np.einsum("ki,kij,kj->k", u, geom.g, d)))


def bernoulli_potential(state: FluidState, eos: Eos, x: np.ndarray) -> np.ndarray:
    """``1/2 |u|^2 - e - P/rho`` at points; its endpoint jump drives open-curve circulation."""
    xw, geom, u, rho, S = sample_state(state, np.atleast_2d(x))
    P = eos.pressure(rho, S)[0]
    e = eos.internal_energy(rho, S)
    usq = np.einsum("ki,kij,kj->k", u, geom.g, u)
    return 0.5 * usq - e - P / rho


def circulation_endpoint_term(curve: MarkerSet, state: FluidState, eos: Eos) -> float:
    """``[1/2|u|^2 - e - P/rho]_start^end`` (zero for closed curves)."""
    if curve.closed:
        return 0.0
    pts = curve.polyline
    vals = bernoulli_potential(state, eos, np.stack([pts[0], pts[-1]]))
    return float(vals[1] - vals[0])


def local_conservation_residual(spec, state: FluidState, eos: Eos, order: int = 2, check: bool = True, flux=None) -> np.ndarray:
    """Grid field ``D_t T + nabla_i (T u^i + Phi^i)`` with D_t taken through the Euler equations."""
    grid = state.grid
    chart = grid.chart
    if check and isinstance(spec, DensitySpec):
        ensure_compatible(spec, chart, eos)
    ops = grid_ops(grid, order)
    rates = euler_rhs(state, eos, ops=ops)
    geom = grid.geometry
    expr = _expr(spec)
    fl = flux if flux is not None else _flux(spec)
    p = expr.partials(state.t, grid.coords, geom, chart, state.u, state.rho, state.S, eos)
    dT = p.T_t + np.einsum("...i,...i->...", p.T_u, rates.u) + p.T_rho * rates.rho + p.T_S * rates.S
    total = p.T[..., None] * state.u
    if fl is not None:
        total = total + fl.partials(state.t, grid.coords, geom, chart, state.u, state.rho, state.S, eos).Phi
    return dT + ops.div(total)
