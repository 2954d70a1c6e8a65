"""Batches of jet-space points with curvature-consistent second derivatives."""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional

import numpy as np

from ..manifold.chart import ChartMetric, GeometryEval, geometry


@dataclass(frozen=True, eq=False)
class JetPoint:
    """A batch of ``B`` jet points on one chart.

    Covariant derivatives are derivative-index first:
    ``du[b, j, i] = nabla_j u^i``, ``hu[b, j, k, i] = nabla_j nabla_k u^i``,
    ``hrho[b, j, k] = nabla_j nabla_k rho``.
    """

    chart: ChartMetric
    geom: GeometryEval
    t: np.ndarray
    x: np.ndarray
    u: np.ndarray
    rho: np.ndarray
    S: np.ndarray
    du: np.ndarray
    drho: np.ndarray
    dS: np.ndarray
    hu: Optional[np.ndarray] = None
    hrho: Optional[np.ndarray] = None
    hS: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.rho)

    @property
    def order(self) -> int:
        return 1 if self.hu is None else 2

    @property
    def dim(self) -> int:
        return self.chart.dim

    def take(self, index) -> "JetPoint":
        kw = {}
        for f in self.__dataclass_fields__:
            v = getattr(self, f)
            if f == "chart":
                kw[f] = v
            elif f == "geom":
                kw[f] = v.take(index)
            else:
                kw[f] = None if v is None else np.asarray(v)[index]
        return JetPoint(**kw)

    def with_values(self, **kw) -> "JetPoint":
        return replace(self, **kw)

    def curvature_defect(self) -> float:
        """Max violation of ``nabla_[j nabla_k] u^i = -1/2 R_jkl^i u^l`` and of symmetric scalar Hessians."""
        if self.hu is None:
            return 0.0
        anti = 0.5 * (self.hu - np.swapaxes(self.hu, 1, 2))
        forced = -0.5 * np.einsum("bjkli,bl->bjki", self.geom.riemann, self.u)
        d1 = np.max(np.abs(anti - forced))
        d2 = np.max(np.abs(self.hrho - np.swapaxes(self.hrho, 1, 2)))
        d3 = np.max(np.abs(self.hS - np.swapaxes(self.hS, 1, 2)))
        return float(max(d1, d2, d3))


def _interior_box(chart: ChartMetric):
    lo = np.asarray(chart.lower, float)
    hi = np.asarray(chart.upper, float)
    if chart.singular_distance_fn is not None:
        pad = np.where(chart.periodic, 0.0, 4.0 * np.asarray(chart.h_geom))
        lo, hi = lo + pad, hi - pad
    return lo, hi


def _sym(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.swapaxes(a, -1, -2))


def sample_jets(
    chart: ChartMetric,
    count: int,
    seed: int,
    order: int = 1,
    scale: float = 1.0,
    rho_range=(0.5, 2.0),
    S_range=(-1.0, 1.0),
    t_range=(0.0, 2.0),
) -> JetPoint:
    """Seeded jet samples; jet ``k`` draws from ``default_rng([seed, k])``.

    Values: x uniform over the chart interior, t and rho and S uniform in their
    ranges, u and every derivative from ``scale``-scaled normal draws.  At
    order 2 the symmetric parts of the second derivatives are drawn and the
    antisymmetric part of ``nabla nabla u`` is fixed by the curvature.
    """
    if count <= 0:
        raise ValueError("count must be positive")
    if order not in (1, 2):
        raise ValueError("order must be 1 or 2")
    n = chart.dim
    lo, hi = _interior_box(chart)
    cols = {k: [] for k in ("t", "x", "u", "rho", "S", "du", "drho", "dS", "hu", "hrho", "hS")}
    for k in range(count):
        rng = np.random.default_rng([int(seed), k])
        cols["x"].append(lo + (hi - lo) * rng.random(n))
        cols["t"].append(rng.uniform(*t_range))
        cols["u"].append(scale * rng.standard_normal(n))
        cols["rho"].append(rng.uniform(*rho_range))
        cols["S"].append(rng.uniform(*S_range))
        cols["du"].append(scale * rng.standard_normal((n, n)))
        cols["drho"].append(scale * rng.standard_normal(n))
        cols["dS"].append(scale * rng.standard_normal(n))
        if order == 2:
            r = scale * rng.standard_normal((n, n, n))
            cols["hu"].append(0.5 * (r + r.transpose(1, 0, 2)))
            cols["hrho"].append(_sym(scale * rng.standard_normal((n, n))))
            cols["hS"].append(_sym(scale * rng.standard_normal((n, n))))
    arr = {k: np.asarray(v, float) for k, v in cols.items() if v}
    geom = geometry(chart, arr["x"], curvature=(order == 2))
    hu = hrho = hS = None
    if order == 2:
        forced = -0.5 * np.einsum("bjkli,bl->bjki", geom.riemann, arr["u"])
        hu = arr["hu"] + forced
        hrho, hS = arr["hrho"], arr["hS"]
    return JetPoint(
        chart=chart,
        geom=geom,
        t=arr["t"],
        x=arr["x"],
        u=arr["u"],
        rho=arr["rho"],
        S=arr["S"],
        du=arr["du"],
        drho=arr["drho"],
        dS=arr["dS"],
        hu=hu,
        hrho=hrho,
        hS=hS,
    )


def jet_at(chart: ChartMetric, x, u, rho, S, du=None, drho=None, dS=None, t=0.0) -> JetPoint:
    """Single first-order jet built from explicit values (zero derivatives by default)."""
    n = chart.dim
    x = np.atleast_2d(np.asarray(x, float))
    geom = geometry(chart, x, curvature=False)
    z = lambda shape: np.zeros((1,) + shape)
    return JetPoint(
        chart=chart,
        geom=geom,
        t=np.array([float(t)]),
        x=x,
        u=np.asarray(u, float).reshape(1, n),
        rho=np.array([float(rho)]),
        S=np.array([float(S)]),
        du=z((n, n)) if du is None else np.asarray(du, float).reshape(1, n, n),
        drho=z((n,)) if drho is None else np.asarray(drho, float).reshape(1, n),
        dS=z((n,)) if dS is None else np.asarray(dS, float).reshape(1, n),
    )
