"""Coordinate charts with a Riemannian metric and the geometry derived from it.

Index layout used throughout the package (all arrays carry leading batch axes):

* ``g[..., i, j]``                  metric components g_ij
* ``dg[..., k, i, j]``              partial_k g_ij
* ``christoffel[..., i, j, k]``     Gamma^i_jk
* ``riemann[..., i, j, k, l]``      R_ijk^l with [nabla_i, nabla_j] a^l = -R_ijk^l a^k
* ``ricci[..., j, k]``              R_jk = R_jik^i  (positive on spheres)

With this sign convention R_ijk^l = -Rstd^l_kij where Rstd is the usual
d Gamma - d Gamma + Gamma Gamma - Gamma Gamma expression.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ..errors import GeometryError

ArrayFn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ChartMetric:
    """A box-shaped coordinate chart ``[lower, upper)`` carrying a metric.

    ``metric_fn`` maps points of shape ``(..., n)`` to ``(..., n, n)``.
    ``metric_deriv_fn`` (optional) returns ``partial_k g_ij`` laid out as
    ``(..., k, i, j)``; ``metric_hess_fn`` (optional) returns
    ``partial_k partial_l g_ij`` as ``(..., k, l, i, j)``.  Missing derivatives
    are replaced by central differences with per-axis step ``h_geom``.

    ``singular_distance_fn`` reports the coordinate distance to loci where the
    chart degenerates (for example the poles of a sphere); geometry requests
    closer than ``h_geom`` are refused.
    """

    dim: int
    lower: tuple
    upper: tuple
    periodic: tuple
    metric_fn: ArrayFn
    metric_deriv_fn: Optional[ArrayFn] = None
    metric_hess_fn: Optional[ArrayFn] = None
    name: str = "chart"
    h_geom: Optional[tuple] = None
    singular_distance_fn: Optional[ArrayFn] = None
    sympy_metric: Optional[Callable] = field(default=None, compare=False)
    params: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.dim < 2:
            raise GeometryError(f"chart dimension must be >= 2, got {self.dim}")
        for name in ("lower", "upper", "periodic"):
            if len(getattr(self, name)) != self.dim:
                raise GeometryError(f"{name} must have {self.dim} entries")
        if any(b <= a for a, b in zip(self.lower, self.upper)):
            raise GeometryError("chart box must have upper > lower on every axis")
        if self.h_geom is None:
            object.__setattr__(self, "h_geom", tuple(1e-4 * e for e in self.extent))

    @property
    def extent(self) -> np.ndarray:
        return np.asarray(self.upper, float) - np.asarray(self.lower, float)

    @property
    def fully_periodic(self) -> bool:
        return all(self.periodic)

    def with_h_geom(self, h: Sequence[float] | float) -> "ChartMetric":
        h = tuple(np.broadcast_to(np.asarray(h, float), (self.dim,)))
        kwargs = {f: getattr(self, f) for f in self.__dataclass_fields__}
        kwargs["h_geom"] = h
        return ChartMetric(**kwargs)

    def without_derivatives(self) -> "ChartMetric":
        """Same chart with analytic derivatives stripped (forces the difference path)."""
        kwargs = {f: getattr(self, f) for f in self.__dataclass_fields__}
        kwargs["metric_deriv_fn"] = None
        kwargs["metric_hess_fn"] = None
        return ChartMetric(**kwargs)

    def wrap(self, x: np.ndarray) -> np.ndarray:
        """Map points into the fundamental box along periodic axes."""
        x = np.array(x, dtype=float, copy=True)
        lo = np.asarray(self.lower, float)
        ext = self.extent
        for k, p in enumerate(self.periodic):
            if p:
                x[..., k] = lo[k] + np.mod(x[..., k] - lo[k], ext[k])
        return x

    def contains(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, float)
        ok = np.ones(x.shape[:-1], dtype=bool)
        for k, p in enumerate(self.periodic):
            if not p:
                ok &= (x[..., k] >= self.lower[k]) & (x[..., k] <= self.upper[k])
        return ok


def _check_points(chart: ChartMetric, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != chart.dim:
        raise GeometryError(f"points must have trailing dimension {chart.dim}, got {x.shape}")
    if not np.all(np.isfinite(x)):
        raise GeometryError("non-finite chart coordinates")
    if chart.singular_distance_fn is not None:
        dist = np.asarray(chart.singular_distance_fn(x))
        hmax = max(chart.h_geom)
        bad = dist <= hmax
        if np.any(bad):
            idx = np.argwhere(bad)[0]
            loc = x[tuple(idx)] if x.ndim > 1 else x
            raise GeometryError(
                f"point {np.array2string(np.asarray(loc), precision=6)} lies within "
                f"h_geom={hmax:.3g} of a singular locus of chart '{chart.name}'"
            )
    return x


def metric(chart: ChartMetric, x: np.ndarray, check: bool = True) -> np.ndarray:
    """Evaluate g_ij at ``x`` and verify symmetry and positive definiteness."""
    x = _check_points(chart, x)
    g = np.asarray(chart.metric_fn(x), dtype=float)
    if check:
        _validate_metric(chart, x, g)
    return g


def _validate_metric(chart: ChartMetric, x: np.ndarray, g: np.ndarray) -> None:
    if not np.all(np.isfinite(g)):
        raise GeometryError(f"metric of chart '{chart.name}' is not finite")
    asym = np.max(np.abs(g - np.swapaxes(g, -1, -2)), initial=0.0)
    if asym > 1e-12 * max(1.0, float(np.max(np.abs(g)))):
        raise GeometryError(f"metric of chart '{chart.name}' is not symmetric (max asymmetry {asym:.3g})")
    eig = np.linalg.eigvalsh(g)
    if np.any(eig <= 0):
        flat = eig.reshape(-1, chart.dim)
        i = int(np.argmin(flat.min(axis=-1)))
        pts = x.reshape(-1, chart.dim)
        raise GeometryError(
            f"metric of chart '{chart.name}' is not positive definite at "
            f"{np.array2string(pts[i % len(pts)], precision=6)}: eigenvalues "
            f"{np.array2string(flat[i], precision=6)}"
        )


def _central_diff(fn: ArrayFn, x: np.ndarray, h: Sequence[float]) -> np.ndarray:
    """Stack of central differences of ``fn`` along every coordinate axis.

    The derivative axis is inserted right after the batch axes.
    """
    n = x.shape[-1]
    parts = []
    for k in range(n):
        e = np.zeros(n)
        e[k] = h[k]
        parts.append((np.asarray(fn(x + e)) - np.asarray(fn(x - e))) / (2.0 * h[k]))
    return np.stack(parts, axis=x.ndim - 1)


def metric_derivative(chart: ChartMetric, x: np.ndarray, analytic: bool = True) -> np.ndarray:
    """``partial_k g_ij`` laid out as ``(..., k, i, j)``."""
    x = np.asarray(x, float)
    if analytic and chart.metric_deriv_fn is not None:
        return np.asarray(chart.metric_deriv_fn(x), float)
    return _central_diff(chart.metric_fn, x, chart.h_geom)


def _christoffel_from(ginv: np.ndarray, dg: np.ndarray) -> np.ndarray:
    # lower[l, j, k] = 1/2 (d_j g_lk + d_k g_lj - d_l g_jk)
    d_j_lk = np.swapaxes(dg, -3, -2)  # [..., l, j, k] = d_j g_lk
    d_k_lj = np.moveaxis(dg, -3, -1)  # [..., l, j, k] = d_k g_lj
    lower = 0.5 * (d_j_lk + d_k_lj - dg)
    return np.einsum("...il,...ljk->...ijk", ginv, lower)


def christoffel(chart: ChartMetric, x: np.ndarray, analytic: bool = True) -> np.ndarray:
    """Levi-Civita symbols Gamma^i_jk at ``x`` (symmetric in j, k)."""
    g = metric(chart, x)
    ginv = np.linalg.inv(g)
    return _symmetrize_jk(_christoffel_from(ginv, metric_derivative(chart, x, analytic)))


def _symmetrize_jk(gam: np.ndarray) -> np.ndarray:
    return 0.5 * (gam + np.swapaxes(gam, -1, -2))


def christoffel_derivative(chart: ChartMetric, x: np.ndarray, analytic: bool = True) -> np.ndarray:
    """``partial_m Gamma^i_jk`` laid out as ``(..., m, i, j, k)``."""
    x = np.asarray(x, float)
    if analytic and chart.metric_deriv_fn is not None and chart.metric_hess_fn is not None:
        g = np.asarray(chart.metric_fn(x), float)
        ginv = np.linalg.inv(g)
        dg = np.asarray(chart.metric_deriv_fn(x), float)
        hg = np.asarray(chart.metric_hess_fn(x), float)  # [..., m, a, i, j]
        lower = 0.5 * (np.swapaxes(dg, -3, -2) + np.moveaxis(dg, -3, -1) - dg)
        d_lower = 0.5 * (
            np.swapaxes(hg, -3, -2) + np.moveaxis(hg, -3, -1) - hg
        )  # [..., m, l, j, k]
        dginv = -np.einsum("...ia,...mab,...bl->...mil", ginv, dg, ginv)
        out = np.einsum("...mil,...ljk->...mijk", dginv, lower)
        out = out + np.einsum("...il,...mljk->...mijk", ginv, d_lower)
        return 0.5 * (out + np.swapaxes(out, -1, -2))

    def gam(y):
        g = np.asarray(chart.metric_fn(y), float)
        return _symmetrize_jk(_christoffel_from(np.linalg.inv(g), metric_derivative(chart, y, analytic)))

    return _central_diff(gam, x, chart.h_geom)


def riemann_from(christ: np.ndarray, dchrist: np.ndarray) -> np.ndarray:
    """Curvature R_ijk^l (layout ``[..., i, j, k, l]``) from Gamma and its derivative."""
    # std[a, b, i, j] = Rstd^a_bij = d_i G^a_jb - d_j G^a_ib + G^a_im G^m_jb - G^a_jm G^m_ib
    d_i = np.einsum("...iajb->...abij", dchrist)
    quad = np.einsum("...aim,...mjb->...abij", christ, christ)
    std = d_i - np.swapaxes(d_i, -1, -2) + quad - np.swapaxes(quad, -1, -2)
    # R_ijk^l = -Rstd^l_kij
    return -np.einsum("...lkij->...ijkl", std)


@dataclass(frozen=True)
class GeometryEval:
    """Immutable bundle of metric data evaluated at a batch of points."""

    x: np.ndarray
    g: np.ndarray
    g_inv: np.ndarray
    sqrt_det_g: np.ndarray
    dg: np.ndarray
    christoffel: np.ndarray
    dchristoffel: Optional[np.ndarray] = None
    riemann: Optional[np.ndarray] = None
    ricci: Optional[np.ndarray] = None
    scalar_curv: Optional[np.ndarray] = None

    def __post_init__(self):
        for f in self.__dataclass_fields__:
            v = getattr(self, f)
            if isinstance(v, np.ndarray):
                v.flags.writeable = False

    @property
    def dim(self) -> int:
        return self.g.shape[-1]

    def take(self, index) -> "GeometryEval":
        """Select a sub-batch (``index`` applies to the leading batch axes)."""
        kwargs = {}
        for f in self.__dataclass_fields__:
            v = getattr(self, f)
            kwargs[f] = None if v is None else np.array(v[index])
        return GeometryEval(**kwargs)


def geometry(
    chart: ChartMetric,
    x: np.ndarray,
    curvature: bool = True,
    analytic: bool = True,
    check: bool = True,
) -> GeometryEval:
    """Evaluate metric, inverse, volume density, connection and (optionally) curvature."""
    x = _check_points(chart, x)
    g = np.asarray(chart.metric_fn(x), float)
    if check:
        _validate_metric(chart, x, g)
    ginv = np.linalg.inv(g)
    ginv = 0.5 * (ginv + np.swapaxes(ginv, -1, -2))
    sqrt_det = np.sqrt(np.linalg.det(g))
    dg = metric_derivative(chart, x, analytic)
    gam = _symmetrize_jk(_christoffel_from(ginv, dg))
    dgam = riem = ric = scal = None
    if curvature:
        dgam = christoffel_derivative(chart, x, analytic)
        riem = riemann_from(gam, dgam)
        ric = np.einsum("...jiki->...jk", riem)
        scal = np.einsum("...jk,...jk->...", ginv, ric)
    return GeometryEval(
        x=np.array(x),
        g=g,
        g_inv=ginv,
        sqrt_det_g=sqrt_det,
        dg=dg,
        christoffel=gam,
        dchristoffel=dgam,
        riemann=riem,
        ricci=ric,
        scalar_curv=scal,
    )


def riemann(chart: ChartMetric, x: np.ndarray, analytic: bool = True):
    """Return ``(R_ijk^l, Ricci_jk, scalar R)`` at ``x``."""
    geo = geometry(chart, x, curvature=True, analytic=analytic)
    return geo.riemann, geo.ricci, geo.scalar_curv


def curvature_identity_defects(geo: GeometryEval) -> dict:
    """Max violations of the algebraic symmetries of the curvature tensor."""
    R = geo.riemann
    antisym = np.max(np.abs(R + np.swapaxes(R, -4, -3)), initial=0.0)
    bianchi = R + np.einsum("...jkil->...ijkl", R) + np.einsum("...kijl->...ijkl", R)
    # all-lower form R_ijkm = R_ijk^l g_lm is antisymmetric in its last pair and pair-symmetric
    low = np.einsum("...ijkl,...lm->...ijkm", R, geo.g)
    last_pair = np.max(np.abs(low + np.swapaxes(low, -1, -2)), initial=0.0)
    pair_sym = np.max(np.abs(low - np.einsum("...klij->...ijkl", low)), initial=0.0)
    ric = geo.ricci
    return {
        "antisymmetry": float(antisym),
        "bianchi": float(np.max(np.abs(bianchi), initial=0.0)),
        "last_pair": float(last_pair),
        "pair_symmetry": float(pair_sym),
        "ricci_symmetry": float(np.max(np.abs(ric - np.swapaxes(ric, -1, -2)), initial=0.0)),
        "christoffel_symmetry": float(
            np.max(np.abs(geo.christoffel - np.swapaxes(geo.christoffel, -1, -2)), initial=0.0)
        ),
        "inverse": float(
            np.max(np.abs(np.einsum("...ij,...jk->...ik", geo.g_inv, geo.g) - np.eye(geo.dim)), initial=0.0)
        ),
    }
