"""Structured grids over a chart and the fluid fields living on them."""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from ..errors import StateError
from ..manifold.chart import ChartMetric, GeometryEval, geometry
from .expressions import field_from_config


@dataclass(frozen=True, eq=False)
class Grid:
    """Uniform lattice ``x_k = lower + k h`` with ``h = extent / N`` on every axis.

    Every axis is treated as periodic by the difference stencils; on charts with
    non-periodic axes the flow must stay clear of the box edges.
    """

    chart: ChartMetric
    shape: tuple

    def __post_init__(self):
        if len(self.shape) != self.chart.dim:
            raise StateError(f"grid shape {self.shape} does not match chart dimension {self.chart.dim}")
        if any(int(s) < 4 for s in self.shape):
            raise StateError("grid needs at least 4 points per axis")
        object.__setattr__(self, "shape", tuple(int(s) for s in self.shape))

    @property
    def dim(self) -> int:
        return self.chart.dim

    @cached_property
    def spacing(self) -> np.ndarray:
        return self.chart.extent / np.asarray(self.shape, float)

    @cached_property
    def axes(self) -> list:
        lo = np.asarray(self.chart.lower, float)
        return [lo[k] + self.spacing[k] * np.arange(self.shape[k]) for k in range(self.dim)]

    @cached_property
    def coords(self) -> np.ndarray:
        mesh = np.meshgrid(*self.axes, indexing="ij")
        return np.stack(mesh, axis=-1)

    @cached_property
    def geometry(self) -> GeometryEval:
        return geometry(self.chart, self.coords, curvature=False)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    def describe(self) -> dict:
        return {"chart": self.chart.name, "chart_params": dict(self.chart.params), "shape": list(self.shape)}


@dataclass(frozen=True, eq=False)
class FluidState:
    """Velocity components ``u^i`` (trailing axis), density and entropy on a grid."""

    grid: Grid
    u: np.ndarray
    rho: np.ndarray
    S: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        shp = self.grid.shape
        if self.u.shape != shp + (self.grid.dim,):
            raise StateError(f"velocity must have shape {shp + (self.grid.dim,)}, got {self.u.shape}")
        if self.rho.shape != shp or self.S.shape != shp:
            raise StateError(f"rho and S must have shape {shp}")

    def validate(self) -> "FluidState":
        for name in ("u", "rho", "S"):
            arr = getattr(self, name)
            if not np.all(np.isfinite(arr)):
                idx = np.argwhere(~np.isfinite(arr))[0]
                raise StateError(f"non-finite {name} at grid index {tuple(int(i) for i in idx)} (t={self.t:.6g})")
        if np.any(self.rho <= 0):
            idx = np.unravel_index(int(np.argmin(self.rho)), self.rho.shape)
            x = self.grid.coords[idx]
            raise StateError(
                f"non-positive density {self.rho[idx]:.3g} at grid index {tuple(int(i) for i in idx)}, "
                f"x={np.array2string(x, precision=4)} (t={self.t:.6g})"
            )
        return self

    def with_fields(self, u=None, rho=None, S=None, t=None) -> "FluidState":
        return replace(
            self,
            u=self.u if u is None else u,
            rho=self.rho if rho is None else rho,
            S=self.S if S is None else S,
            t=self.t if t is None else t,
        )

    # -- export -----------------------------------------------------------
    def save_npz(self, path) -> Path:
        path = Path(path)
        meta = {"t": self.t, **self.grid.describe()}
        np.savez(path, u=self.u, rho=self.rho, S=self.S, coords=self.grid.coords, meta=json.dumps(meta))
        return path

    def save_csv(self, path) -> Path:
        path = Path(path)
        n = self.grid.dim
        x = self.grid.coords.reshape(-1, n)
        u = self.u.reshape(-1, n)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow([f"x{k}" for k in range(n)] + [f"u{k}" for k in range(n)] + ["rho", "S"])
            for row in zip(x, u, self.rho.ravel(), self.S.ravel()):
                w.writerow([repr(float(v)) for v in row[0]] + [repr(float(v)) for v in row[1]] + [repr(float(row[2])), repr(float(row[3]))])
        return path


def load_npz(path, chart: ChartMetric) -> FluidState:
    data = np.load(path)
    meta = json.loads(str(data["meta"]))
    grid = Grid(chart, tuple(meta["shape"]))
    return FluidState(grid, data["u"], data["rho"], data["S"], float(meta["t"]))


def state_from_fields(grid: Grid, u_fields: Sequence, rho_field, S_field, t: float = 0.0) -> FluidState:
    """Sample initial-condition expressions (see ``field_from_config``) on the grid."""
    x = grid.coords
    if len(u_fields) != grid.dim:
        raise StateError(f"need {grid.dim} velocity components, got {len(u_fields)}")
    u = np.stack([field_from_config(f)(x) for f in u_fields], axis=-1)
    rho = field_from_config(rho_field)(x)
    S = field_from_config(S_field)(x)
    return FluidState(grid, u, rho, S, t).validate()


def uniform_state(grid: Grid, u: Optional[Sequence[float]] = None, rho: float = 1.0, S: float = 0.0) -> FluidState:
    shp = grid.shape
    uu = np.zeros(shp + (grid.dim,)) if u is None else np.broadcast_to(np.asarray(u, float), shp + (grid.dim,)).copy()
    return FluidState(grid, uu, np.full(shp, float(rho)), np.full(shp, float(S))).validate()
