"""Periodic central-difference operators on a structured grid.

Spatial axes come first; any trailing axes are field components.  Gradients
insert the derivative index right after the spatial axes, so for a vector
field ``u[..., i]`` the result is ``du[..., j, i] = partial_j u^i``.
"""

from __future__ import annotations

from functools import cached_property

import numpy as np

from ..fluid.state import Grid
from ..manifold.chart import GeometryEval


def partial(f: np.ndarray, axis: int, h: float, order: int = 2) -> np.ndarray:
    """Central difference of ``f`` along spatial ``axis`` with periodic wrap."""
    if order == 2:
        return (np.roll(f, -1, axis) - np.roll(f, 1, axis)) / (2.0 * h)
    if order == 4:
        return (
            8.0 * (np.roll(f, -1, axis) - np.roll(f, 1, axis)) - (np.roll(f, -2, axis) - np.roll(f, 2, axis))
        ) / (12.0 * h)
    raise ValueError(f"unsupported stencil order {order}; use 2 or 4")


class GridOps:
    """Covariant differential operators on a grid with a fixed stencil order."""

    def __init__(self, grid: Grid, order: int = 2):
        if order not in (2, 4):
            raise ValueError("stencil order must be 2 or 4")
        self.grid = grid
        self.order = order
        self.n = grid.dim
        self.h = grid.spacing

    @cached_property
    def geom(self) -> GeometryEval:
        return self.grid.geometry

    @cached_property
    def flat(self) -> bool:
        return bool(np.all(self.geom.christoffel == 0.0)) and bool(np.all(self.geom.sqrt_det_g == 1.0))

    def grad(self, f: np.ndarray) -> np.ndarray:
        """Coordinate partials with the derivative axis placed after the spatial axes."""
        parts = [partial(f, k, self.h[k], self.order) for k in range(self.n)]
        return np.stack(parts, axis=self.n)

    def cov_grad_vector(self, u: np.ndarray) -> np.ndarray:
        """``nabla_j u^i`` as ``[..., j, i]``."""
        du = self.grad(u)
        if self.flat:
            return du
        return du + np.einsum("...ijk,...k->...ji", self.geom.christoffel, u)

    def div(self, v: np.ndarray) -> np.ndarray:
        """Divergence in conservation form ``(1/sqrt g) partial_i (sqrt g v^i)``.

        Summing ``sqrt g * div`` over a periodic grid telescopes to zero exactly.
        """
        if self.flat:
            return sum(partial(v[..., k], k, self.h[k], self.order) for k in range(self.n))
        w = self.geom.sqrt_det_g[..., None] * v
        return sum(partial(w[..., k], k, self.h[k], self.order) for k in range(self.n)) / self.geom.sqrt_det_g

    def raise_index(self, w: np.ndarray) -> np.ndarray:
        if self.flat:
            return w
        return np.einsum("...ij,...j->...i", self.geom.g_inv, w)

    def lower_index(self, v: np.ndarray) -> np.ndarray:
        if self.flat:
            return v
        return np.einsum("...ij,...j->...i", self.geom.g, v)

    def metric_grad(self, f: np.ndarray) -> np.ndarray:
        """``nabla^i f = g^{ij} partial_j f``."""
        return self.raise_index(self.grad(f))

    def norm_sq(self, v: np.ndarray) -> np.ndarray:
        if self.flat:
            return np.sum(v * v, axis=-1)
        return np.einsum("...i,...ij,...j->...", v, self.geom.g, v)

    def curl(self, u: np.ndarray) -> np.ndarray:
        """``nabla^i u^j - nabla^j u^i`` using the same stencils as ``cov_grad_vector``."""
        up = np.einsum("...ik,...kj->...ij", self.geom.g_inv, self.cov_grad_vector(u)) if not self.flat else self.cov_grad_vector(u)
        return up - np.swapaxes(up, -1, -2)

    def integrate(self, f: np.ndarray) -> float:
        """Riemann sum ``sum f sqrt(g) h^n`` (spectrally accurate for smooth periodic f)."""
        return float(np.sum(f * self.geom.sqrt_det_g) * self.grid.cell_volume)
