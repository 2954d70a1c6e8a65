"""Lagrangian marker sets: interior clouds, boundary polylines and material curves.

Positions are stored unwrapped (they may drift across a periodic seam); grid
lookups wrap them.  Interior weights carry the volume form, so a domain
integral is simply ``sum_k T(x_k) w_k``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Optional, Sequence

import numpy as np
from scipy import ndimage

from ..errors import GeometryError, MarkerLostError
from ..fluid.state import FluidState, Grid
from ..manifold.chart import ChartMetric, geometry

DOMAIN_INTERIOR = "DomainInterior"
DOMAIN_BOUNDARY = "DomainBoundary"
CURVE = "Curve"
KINDS = (DOMAIN_INTERIOR, DOMAIN_BOUNDARY, CURVE)


@dataclass(frozen=True, eq=False)
class MarkerSet:
    """Points advected with the flow.

    For ``DomainBoundary`` and ``Curve`` the positions are ordered polyline
    vertices; ``closed`` joins the last vertex back to the first.  For
    ``DomainInterior`` each marker carries a volume weight.
    """

    kind: str
    positions: np.ndarray
    weights: Optional[np.ndarray] = None
    closed: bool = False
    connectivity: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown marker kind '{self.kind}'")
        pos = np.asarray(self.positions, float)
        if pos.ndim != 2 or len(pos) == 0:
            raise GeometryError("marker positions must be a non-empty (M, n) array")
        object.__setattr__(self, "positions", pos)
        if self.kind == DOMAIN_INTERIOR:
            if self.weights is None or np.shape(self.weights) != (len(pos),):
                raise ValueError("interior markers need one weight per marker")
            if np.any(np.asarray(self.weights) <= 0):
                raise ValueError("marker weights must be positive")
        if self.connectivity is None and self.kind != DOMAIN_INTERIOR:
            object.__setattr__(self, "connectivity", np.arange(len(pos)))

    def __len__(self):
        return len(self.positions)

    @property
    def polyline(self) -> np.ndarray:
        return self.positions[self.connectivity]

    def segments(self):
        """``(start, end)`` vertex arrays of every polyline segment."""
        p = self.polyline
        if self.closed:
            return p, np.roll(p, -1, axis=0)
        return p[:-1], p[1:]

    def arc_elements(self, chart: ChartMetric) -> np.ndarray:
        """Metric length of each segment (midpoint metric)."""
        a, b = self.segments()
        d = b - a
        g = geometry(chart, chart.wrap(0.5 * (a + b)), curvature=False).g
        return np.sqrt(np.einsum("ki,kij,kj->k", d, g, d))

    def with_state(self, positions, weights=None) -> "MarkerSet":
        return replace(self, positions=positions, weights=weights if weights is not None else self.weights)


# ---------------------------------------------------------------------------
# polyline geometry


def _segments_intersect(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])

    d1, d2 = orient(q1, q2, p1), orient(q1, q2, p2)
    d3, d4 = orient(p1, p2, q1), orient(p1, p2, q2)
    return (d1 * d2 < 0) and (d3 * d4 < 0)


def is_simple_polyline(points: np.ndarray, closed: bool = True) -> bool:
    """Brute-force check that no two non-adjacent segments cross (2D only)."""
    p = np.asarray(points, float)
    m = len(p)
    segs = m if closed else m - 1
    for i in range(segs):
        a1, a2 = p[i], p[(i + 1) % m]
        for j in range(i + 2, segs):
            if closed and i == 0 and j == segs - 1:
                continue
            if _segments_intersect(a1, a2, p[j], p[(j + 1) % m]):
                return False
    return True


def signed_area(points: np.ndarray) -> float:
    """Shoelace area in chart coordinates (positive for counter-clockwise)."""
    p = np.asarray(points, float)
    q = np.roll(p, -1, axis=0)
    return 0.5 * float(np.sum(p[:, 0] * q[:, 1] - q[:, 0] * p[:, 1]))


# ---------------------------------------------------------------------------
# builders


def rectangle_domain(
    chart: ChartMetric,
    lower: Sequence[float],
    upper: Sequence[float],
    spacing: float,
    boundary_spacing: Optional[float] = None,
):
    """Interior cloud and counter-clockwise boundary polyline for an axis-aligned box.

    Interior markers sit at the centres of a sub-lattice with (approximately)
    the requested spacing; each weight is the cell volume times ``sqrt det g``.
    Returns ``(interior, boundary)``; the boundary is ``None`` unless n = 2.
    """
    lo = np.asarray(lower, float)
    hi = np.asarray(upper, float)
    if np.any(hi <= lo):
        raise GeometryError("rectangle needs upper > lower")
    counts = np.maximum(1, np.round((hi - lo) / spacing).astype(int))
    hm = (hi - lo) / counts
    axes = [lo[k] + hm[k] * (np.arange(counts[k]) + 0.5) for k in range(len(lo))]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, len(lo))
    sqrtg = geometry(chart, chart.wrap(pts), curvature=False).sqrt_det_g
    interior = MarkerSet(DOMAIN_INTERIOR, pts, weights=np.prod(hm) * sqrtg)
    boundary = None
    if len(lo) == 2:
        bs = boundary_spacing or spacing
        nx = max(1, int(np.round((hi[0] - lo[0]) / bs)))
        ny = max(1, int(np.round((hi[1] - lo[1]) / bs)))
        xs = np.linspace(lo[0], hi[0], nx + 1)
        ys = np.linspace(lo[1], hi[1], ny + 1)
        verts = np.concatenate(
            [
                np.stack([xs[:-1], np.full(nx, lo[1])], axis=-1),
                np.stack([np.full(ny, hi[0]), ys[:-1]], axis=-1),
                np.stack([xs[::-1][:-1], np.full(nx, hi[1])], axis=-1),
                np.stack([np.full(ny, lo[0]), ys[::-1][:-1]], axis=-1),
            ]
        )
        boundary = MarkerSet(DOMAIN_BOUNDARY, verts, closed=True)
    return interior, boundary


def circle_curve(center: Sequence[float], radius: float, count: int) -> MarkerSet:
    """Closed counter-clockwise circle in chart coordinates (n = 2)."""
    if count < 3 or radius <= 0:
        raise GeometryError("circle needs >= 3 vertices and positive radius")
    th = 2.0 * np.pi * np.arange(count) / count
    c = np.asarray(center, float)
    pts = c + radius * np.stack([np.cos(th), np.sin(th)], axis=-1)
    return MarkerSet(CURVE, pts, closed=True)


def segment_curve(start: Sequence[float], end: Sequence[float], count: int) -> MarkerSet:
    """Open straight curve with ``count`` segments."""
    a = np.asarray(start, float)
    b = np.asarray(end, float)
    if count < 1 or np.allclose(a, b):
        raise GeometryError("segment needs distinct endpoints and >= 1 piece")
    s = np.linspace(0.0, 1.0, count + 1)[:, None]
    return MarkerSet(CURVE, a + s * (b - a), closed=False)


def polygon_boundary(vertices: Sequence[Sequence[float]], spacing: float) -> MarkerSet:
    """Closed polyline through ``vertices`` refined to roughly ``spacing``; oriented CCW."""
    v = np.asarray(vertices, float)
    if signed_area(v) < 0:
        v = v[::-1]
    pts = []
    for a, b in zip(v, np.roll(v, -1, axis=0)):
        m = max(1, int(np.ceil(np.linalg.norm(b - a) / spacing)))
        pts.append(a + np.linspace(0, 1, m, endpoint=False)[:, None] * (b - a))
    pts = np.concatenate(pts)
    if not is_simple_polyline(pts):
        raise GeometryError("polygon boundary is self-intersecting")
    return MarkerSet(DOMAIN_BOUNDARY, pts, closed=True)


# ---------------------------------------------------------------------------
# interpolation and advection


def _locate(grid: Grid, x: np.ndarray):
    """Per-axis lower node indices, upper node indices and fractional offsets."""
    chart = grid.chart
    lo = np.asarray(chart.lower, float)
    h = grid.spacing
    idx0, idx1, frac = [], [], []
    for k in range(grid.dim):
        s = (x[..., k] - lo[k]) / h[k]
        N = grid.shape[k]
        if chart.periodic[k]:
            i0 = np.floor(s)
            f = s - i0
            i0 = np.mod(i0.astype(np.int64), N)
            i1 = np.mod(i0 + 1, N)
        else:
            bad = (s < 0) | (s > N - 1)
            if np.any(bad):
                where = np.argwhere(bad)[0]
                raise MarkerLostError(
                    f"point {np.array2string(np.asarray(x)[tuple(where)], precision=5)} is outside the "
                    f"non-periodic axis {k} of chart '{chart.name}'"
                )
            i0 = np.minimum(np.floor(s).astype(np.int64), N - 2)
            f = s - i0
            i1 = i0 + 1
        idx0.append(i0)
        idx1.append(i1)
        frac.append(f)
    return idx0, idx1, frac


def interpolate(field: np.ndarray, grid: Grid, x: np.ndarray, method: str = "cubic") -> np.ndarray:
    """Interpolate a grid field (spatial axes first) at points ``x``.

    ``method="cubic"`` uses periodic cubic B-splines, which are twice
    differentiable, so integrals over moving markers vary smoothly in time.
    ``method="linear"`` is multilinear and exact for cellwise-linear fields.
    """
    x = np.asarray(x, float)
    if method == "cubic":
        return _spline_interpolate(field, grid, x)
    if method != "linear":
        raise ValueError(f"unknown interpolation method '{method}'")
    idx0, idx1, frac = _locate(grid, x)
    n = grid.dim
    comp = field.shape[n:]
    out = np.zeros(x.shape[:-1] + comp)
    for corner in range(2**n):
        w = np.ones(x.shape[:-1])
        index = []
        for k in range(n):
            if (corner >> k) & 1:
                w = w * frac[k]
                index.append(idx1[k])
            else:
                w = w * (1.0 - frac[k])
                index.append(idx0[k])
        out = out + w.reshape(w.shape + (1,) * len(comp)) * field[tuple(index)]
    return out


_SPLINE_CACHE: list = []


def _spline_coefficients(field: np.ndarray, n: int) -> np.ndarray:
    """Prefiltered periodic B-spline coefficients, cached for the few most recent fields."""
    for src, coef in _SPLINE_CACHE:
        if src is field:
            return coef
    flat = field.reshape(field.shape[:n] + (-1,))
    coef = np.stack(
        [ndimage.spline_filter(flat[..., c], order=3, mode="grid-wrap") for c in range(flat.shape[-1])], axis=-1
    )
    _SPLINE_CACHE.append((field, coef))
    if len(_SPLINE_CACHE) > 16:
        _SPLINE_CACHE.pop(0)
    return coef


def _spline_interpolate(field: np.ndarray, grid: Grid, x: np.ndarray) -> np.ndarray:
    _locate(grid, x)  # range check on non-periodic axes
    n = grid.dim
    lo = np.asarray(grid.chart.lower, float)
    s = ((x - lo) / grid.spacing).reshape(-1, n).T
    comp = field.shape[n:]
    coef = _spline_coefficients(field, n)
    cols = [
        ndimage.map_coordinates(coef[..., c], s, order=3, mode="grid-wrap", prefilter=False)
        for c in range(coef.shape[-1])
    ]
    return np.stack(cols, axis=-1).reshape(x.shape[:-1] + comp)


def check_clearance(markers: MarkerSet, grid: Grid, cells: float = 2.0) -> None:
    """Raise if markers come within ``cells`` grid spacings of a non-periodic edge."""
    chart = grid.chart
    for k, p in enumerate(chart.periodic):
        if p:
            continue
        lo = chart.lower[k] + cells * grid.spacing[k]
        hi = chart.lower[k] + (grid.shape[k] - 1 - cells) * grid.spacing[k]
        xk = markers.positions[:, k]
        if np.any(xk < lo) or np.any(xk > hi):
            raise MarkerLostError(
                f"markers within {cells} grid cells of the edge of axis {k} on chart '{chart.name}' "
                f"(range [{xk.min():.4g}, {xk.max():.4g}], allowed [{lo:.4g}, {hi:.4g}])"
            )


def advect_markers(
    markers: MarkerSet,
    state: FluidState,
    dt: float,
    state_next: Optional[FluidState] = None,
    div_now: Optional[np.ndarray] = None,
    div_next: Optional[np.ndarray] = None,
    order: int = 2,
) -> MarkerSet:
    """Advance markers by one RK4 step of ``dx/dt = u(x, t)``.

    The velocity is interpolated in space and linearly in time between
    ``state`` and ``state_next`` (frozen at ``state`` if no successor is given).
    Interior weights follow ``dw/dt = (div u) w`` along the same stages.
    """
    from .euler import grid_ops

    grid = state.grid
    nxt = state_next if state_next is not None else state
    interior = markers.kind == DOMAIN_INTERIOR
    if interior and div_now is None:
        ops = grid_ops(grid, order)
        div_now = ops.div(state.u)
        div_next = ops.div(nxt.u) if state_next is not None else div_now

    def vel(x, tau):
        wx = grid.chart.wrap(x)
        v = (1.0 - tau) * interpolate(state.u, grid, wx) + tau * interpolate(nxt.u, grid, wx)
        if interior:
            d = (1.0 - tau) * interpolate(div_now, grid, wx) + tau * interpolate(div_next, grid, wx)
            return v, d
        return v, None

    x0 = markers.positions
    w0 = markers.weights
    v1, d1 = vel(x0, 0.0)
    x2 = x0 + 0.5 * dt * v1
    v2, d2 = vel(x2, 0.5)
    x3 = x0 + 0.5 * dt * v2
    v3, d3 = vel(x3, 0.5)
    x4 = x0 + dt * v3
    v4, d4 = vel(x4, 1.0)
    x_new = x0 + dt / 6.0 * (v1 + 2 * v2 + 2 * v3 + v4)
    w_new = None
    if interior:
        k1 = d1 * w0
        k2 = d2 * (w0 + 0.5 * dt * k1)
        k3 = d3 * (w0 + 0.5 * dt * k2)
        k4 = d4 * (w0 + dt * k3)
        w_new = w0 + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return markers.with_state(x_new, w_new)
