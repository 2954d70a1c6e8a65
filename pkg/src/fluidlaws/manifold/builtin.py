"""Built-in charts: flat torus, torus of revolution, round sphere, flat patch."""

from __future__ import annotations

import numpy as np
import sympy as sp

from ..errors import GeometryError
from .chart import ChartMetric

TWO_PI = 2.0 * np.pi


def _eye_batch(x: np.ndarray) -> np.ndarray:
    n = x.shape[-1]
    return np.broadcast_to(np.eye(n), x.shape[:-1] + (n, n)).copy()


def _zeros_deriv(x: np.ndarray, order: int) -> np.ndarray:
    n = x.shape[-1]
    return np.zeros(x.shape[:-1] + (n,) * (order + 2))


def flat_torus(n: int = 2, length: float = TWO_PI) -> ChartMetric:
    """Euclidean metric on the periodic box ``[0, length)^n``."""
    return ChartMetric(
        dim=n,
        lower=(0.0,) * n,
        upper=(float(length),) * n,
        periodic=(True,) * n,
        metric_fn=_eye_batch,
        metric_deriv_fn=lambda x: _zeros_deriv(x, 1),
        metric_hess_fn=lambda x: _zeros_deriv(x, 2),
        name="flat_torus",
        sympy_metric=lambda xs: sp.eye(len(xs)),
        params={"n": n, "length": float(length)},
    )


def flat_patch(n: int = 2, half_width: float = np.pi) -> ChartMetric:
    """Euclidean metric on the non-periodic box ``[-half_width, half_width)^n``."""
    a = float(half_width)
    return ChartMetric(
        dim=n,
        lower=(-a,) * n,
        upper=(a,) * n,
        periodic=(False,) * n,
        metric_fn=_eye_batch,
        metric_deriv_fn=lambda x: _zeros_deriv(x, 1),
        metric_hess_fn=lambda x: _zeros_deriv(x, 2),
        name="flat_patch",
        sympy_metric=lambda xs: sp.eye(len(xs)),
        params={"n": n, "half_width": a},
    )


def torus_of_revolution(major: float = 2.0) -> ChartMetric:
    """``g = dr^2 + (major + cos r)^2 dtheta^2`` on the doubly periodic square."""
    if major <= 1.0:
        raise GeometryError("torus of revolution needs major radius > 1")
    R0 = float(major)

    def g(x):
        x = np.asarray(x, float)
        f = R0 + np.cos(x[..., 0])
        out = np.zeros(x.shape[:-1] + (2, 2))
        out[..., 0, 0] = 1.0
        out[..., 1, 1] = f * f
        return out

    def dg(x):
        x = np.asarray(x, float)
        r = x[..., 0]
        f = R0 + np.cos(r)
        out = np.zeros(x.shape[:-1] + (2, 2, 2))
        out[..., 0, 1, 1] = -2.0 * f * np.sin(r)
        return out

    def hg(x):
        x = np.asarray(x, float)
        r = x[..., 0]
        f = R0 + np.cos(r)
        out = np.zeros(x.shape[:-1] + (2, 2, 2, 2))
        out[..., 0, 0, 1, 1] = 2.0 * (np.sin(r) ** 2 - f * np.cos(r))
        return out

    def sym(xs):
        return sp.diag(1, (R0 + sp.cos(xs[0])) ** 2)

    return ChartMetric(
        dim=2,
        lower=(0.0, 0.0),
        upper=(TWO_PI, TWO_PI),
        periodic=(True, True),
        metric_fn=g,
        metric_deriv_fn=dg,
        metric_hess_fn=hg,
        name="torus_of_revolution",
        sympy_metric=sym,
        params={"major": R0},
    )


def sphere(n: int = 2, margin: float = 0.2) -> ChartMetric:
    """Unit n-sphere in hyperspherical angles.

    Coordinates ``(theta_1, ..., theta_{n-1}, phi)`` with
    ``g_kk = prod_{m<k} sin^2 theta_m``.  Polar angles are restricted to
    ``[margin, pi - margin]``; the azimuth is periodic.
    """
    if n < 2:
        raise GeometryError("sphere chart needs n >= 2")

    def _prods(x):
        s2 = np.sin(x[..., : n - 1]) ** 2
        diag = np.ones(x.shape[:-1] + (n,))
        for k in range(1, n):
            diag[..., k] = diag[..., k - 1] * s2[..., k - 1]
        return diag

    def g(x):
        x = np.asarray(x, float)
        d = _prods(x)
        out = np.zeros(x.shape[:-1] + (n, n))
        for k in range(n):
            out[..., k, k] = d[..., k]
        return out

    def dg(x):
        x = np.asarray(x, float)
        d = _prods(x)
        cot = np.cos(x[..., : n - 1]) / np.sin(x[..., : n - 1])
        out = np.zeros(x.shape[:-1] + (n, n, n))
        for k in range(n):
            for p in range(min(k, n - 1)):
                out[..., p, k, k] = 2.0 * cot[..., p] * d[..., k]
        return out

    def hg(x):
        x = np.asarray(x, float)
        d = _prods(x)
        th = x[..., : n - 1]
        cot = np.cos(th) / np.sin(th)
        out = np.zeros(x.shape[:-1] + (n, n, n, n))
        for k in range(n):
            for p in range(min(k, n - 1)):
                for q in range(min(k, n - 1)):
                    if p == q:
                        out[..., p, p, k, k] = 2.0 * np.cos(2.0 * th[..., p]) / np.sin(th[..., p]) ** 2 * d[..., k]
                    else:
                        out[..., p, q, k, k] = 4.0 * cot[..., p] * cot[..., q] * d[..., k]
        return out

    def singular_distance(x):
        th = np.asarray(x, float)[..., : n - 1]
        return np.min(np.minimum(th, np.pi - th), axis=-1)

    def sym(xs):
        entries = []
        acc = sp.Integer(1)
        for k in range(n):
            entries.append(acc)
            if k < n - 1:
                acc = acc * sp.sin(xs[k]) ** 2
        return sp.diag(*entries)

    lo = (margin,) * (n - 1) + (0.0,)
    hi = (np.pi - margin,) * (n - 1) + (TWO_PI,)
    return ChartMetric(
        dim=n,
        lower=lo,
        upper=hi,
        periodic=(False,) * (n - 1) + (True,),
        metric_fn=g,
        metric_deriv_fn=dg,
        metric_hess_fn=hg,
        name="sphere",
        singular_distance_fn=singular_distance,
        sympy_metric=sym,
        params={"n": n, "margin": margin},
    )


CHARTS = {
    "flat_torus": flat_torus,
    "torus_of_revolution": torus_of_revolution,
    "sphere": sphere,
    "flat_patch": flat_patch,
}

ALIASES = {"M1": "flat_torus", "M2": "torus_of_revolution", "M3": "sphere", "M4": "flat_patch"}


def make_chart(name: str, **params) -> ChartMetric:
    """Build a chart by registry name (``M1``..``M4`` aliases accepted)."""
    key = ALIASES.get(name, name)
    if key not in CHARTS:
        raise GeometryError(f"unknown chart '{name}'; available: {sorted(CHARTS) + sorted(ALIASES)}")
    return CHARTS[key](**params)


def interior_sample(chart: ChartMetric, count: int, rng: np.random.Generator, margin: float = 0.0) -> np.ndarray:
    """Uniform points in the chart box, shrunk by ``margin`` (fraction of extent) on non-periodic axes."""
    lo = np.asarray(chart.lower, float)
    hi = np.asarray(chart.upper, float)
    ext = hi - lo
    shrink = np.array([0.0 if p else margin for p in chart.periodic]) * ext
    lo = lo + shrink
    hi = hi - shrink
    # stay strictly away from singular loci even at margin 0
    if chart.singular_distance_fn is not None:
        pad = 2.0 * np.asarray(chart.h_geom)
        lo = lo + np.where(chart.periodic, 0.0, pad)
        hi = hi - np.where(chart.periodic, 0.0, pad)
    return lo + (hi - lo) * rng.random((count, chart.dim))


def reference_scalar_curvature(chart: ChartMetric, x) -> Optional[np.ndarray]:
    """Closed-form scalar curvature of the built-in charts (``None`` if unknown)."""
    x = np.asarray(x, float)
    shape = x.shape[:-1]
    if chart.name in ("flat_torus", "flat_patch"):
        return np.zeros(shape)
    if chart.name == "sphere":
        n = chart.dim
        return np.full(shape, float(n * (n - 1)))
    if chart.name == "torus_of_revolution":
        R0 = float(chart.params.get("major", 2.0))
        c = np.cos(x[..., 0])
        return 2.0 * c / (R0 + c)
    return None
