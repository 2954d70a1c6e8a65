"""Vector fields, potentials, covariant derivatives and Killing-type residuals.

Derivative arrays are derivative-index first: ``dv[..., j, i] = partial_j v^i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
import sympy as sp

from ..errors import GeometryError
from .chart import ChartMetric, GeometryEval, _central_diff, geometry, metric_derivative


@dataclass(frozen=True)
class ScalarFieldSpec:
    """A scalar potential psi(x) with optional analytic gradient and Hessian.

    ``grad_fn`` returns ``partial_i psi`` with shape ``(..., n)``; ``hess_fn``
    returns ``partial_i partial_j psi`` with shape ``(..., n, n)``.
    """

    value_fn: Callable[[np.ndarray], np.ndarray]
    grad_fn: Optional[Callable] = None
    hess_fn: Optional[Callable] = None
    sympy_fn: Optional[Callable] = field(default=None, compare=False)
    label: str = "psi"

    def value(self, x):
        return np.asarray(self.value_fn(np.asarray(x, float)), float)

    def grad(self, x, h=1e-5):
        x = np.asarray(x, float)
        if self.grad_fn is not None:
            return np.asarray(self.grad_fn(x), float)
        return _central_diff(self.value_fn, x, (h,) * x.shape[-1])

    def hess(self, x, h=1e-4):
        x = np.asarray(x, float)
        if self.hess_fn is not None:
            return np.asarray(self.hess_fn(x), float)
        return _central_diff(lambda y: self.grad(y), x, (h,) * x.shape[-1])


@dataclass(frozen=True)
class VectorFieldSpec:
    """A contravariant vector field on a chart.

    Either ``value_fn`` (components zeta^i) or ``potential`` must be given.  With
    a potential the field is the metric gradient ``g^{ij} partial_j psi`` and the
    explicit ``value_fn`` (if any) is only used as a cross-check.
    """

    value_fn: Optional[Callable] = None
    deriv_fn: Optional[Callable] = None
    potential: Optional[ScalarFieldSpec] = None
    sympy_fn: Optional[Callable] = field(default=None, compare=False)
    label: str = "zeta"

    def __post_init__(self):
        if self.value_fn is None and self.potential is None:
            raise GeometryError("vector field needs value_fn or potential")

    def value(self, chart: ChartMetric, x) -> np.ndarray:
        x = np.asarray(x, float)
        if self.potential is not None:
            ginv = np.linalg.inv(np.asarray(chart.metric_fn(x), float))
            return np.einsum("...ij,...j->...i", ginv, self.potential.grad(x))
        return np.asarray(self.value_fn(x), float)

    def deriv(self, chart: ChartMetric, x) -> np.ndarray:
        """``partial_j zeta^i`` as ``(..., j, i)``."""
        x = np.asarray(x, float)
        if self.potential is not None:
            g = np.asarray(chart.metric_fn(x), float)
            ginv = np.linalg.inv(g)
            dg = metric_derivative(chart, x)
            dginv = -np.einsum("...ia,...jab,...bk->...jik", ginv, dg, ginv)
            dpsi = self.potential.grad(x)
            hpsi = self.potential.hess(x)
            return np.einsum("...jik,...k->...ji", dginv, dpsi) + np.einsum("...ik,...jk->...ji", ginv, hpsi)
        if self.deriv_fn is not None:
            return np.asarray(self.deriv_fn(x), float)
        return _central_diff(lambda y: self.value(chart, y), x, chart.h_geom)

    def sympy_components(self, chart: ChartMetric, xs):
        """Symbolic components zeta^i as a list (needs ``sympy_fn`` or a symbolic potential)."""
        if self.potential is not None and self.potential.sympy_fn is not None:
            psi = self.potential.sympy_fn(xs)
            ginv = chart.sympy_metric(xs).inv()
            return [sp.simplify(sum(ginv[i, j] * sp.diff(psi, xs[j]) for j in range(len(xs)))) for i in range(len(xs))]
        if self.sympy_fn is None:
            raise GeometryError(f"vector field '{self.label}' has no symbolic form")
        return list(self.sympy_fn(xs))


def potential_consistency(chart: ChartMetric, v: VectorFieldSpec, x) -> float:
    """Max difference between explicit components and g^{-1} d psi (0 when not applicable)."""
    if v.potential is None or v.value_fn is None:
        return 0.0
    x = np.asarray(x, float)
    explicit = np.asarray(v.value_fn(x), float)
    return float(np.max(np.abs(explicit - v.value(chart, x)), initial=0.0))


@dataclass(frozen=True)
class VectorDerivative:
    """Covariant derivative ``grad[..., j, i] = nabla_j u^i`` plus divergence and curl."""

    grad: np.ndarray
    div: np.ndarray
    curl: np.ndarray  # curl[..., i, j] = nabla^i u^j - nabla^j u^i


def covariant_derivative_vector(geom: GeometryEval, u, du) -> VectorDerivative:
    """``nabla_j u^i = partial_j u^i + Gamma^i_jk u^k``."""
    u = np.asarray(u, float)
    du = np.asarray(du, float)
    grad = du + np.einsum("...ijk,...k->...ji", geom.christoffel, u)
    div = np.einsum("...ii->...", grad)
    up = np.einsum("...ik,...kj->...ij", geom.g_inv, grad)
    return VectorDerivative(grad=grad, div=div, curl=up - np.swapaxes(up, -1, -2))


def covariant_hessian_scalar(geom: GeometryEval, dpsi, hpsi) -> np.ndarray:
    """``nabla_i nabla_j psi = partial_i partial_j psi - Gamma^k_ij partial_k psi``."""
    return np.asarray(hpsi, float) - np.einsum("...kij,...k->...ij", geom.christoffel, np.asarray(dpsi, float))


def lower(geom: GeometryEval, v) -> np.ndarray:
    return np.einsum("...ij,...j->...i", geom.g, np.asarray(v, float))


def raise_index(geom: GeometryEval, w) -> np.ndarray:
    return np.einsum("...ij,...j->...i", geom.g_inv, np.asarray(w, float))


def _lie_metric(geom: GeometryEval, v, dv) -> np.ndarray:
    grad = covariant_derivative_vector(geom, v, dv).grad  # [i, k] = nabla_i v^k
    low = np.einsum("...ik,...kj->...ij", grad, geom.g)  # nabla_i v_j
    return low + np.swapaxes(low, -1, -2)


def killing_residual(chart: ChartMetric, zeta: VectorFieldSpec, x) -> np.ndarray:
    """``(L_zeta g)_ij = nabla_i zeta_j + nabla_j zeta_i``; zero iff zeta is Killing."""
    geom = geometry(chart, x, curvature=False)
    return _lie_metric(geom, zeta.value(chart, x), zeta.deriv(chart, x))


def homothety_residual(chart: ChartMetric, xi: VectorFieldSpec, lam: float, x) -> np.ndarray:
    """``L_xi g - lam g``; zero iff xi is a homothety with constant lam."""
    if not np.isfinite(lam):
        raise GeometryError("homothety constant must be finite")
    geom = geometry(chart, x, curvature=False)
    return _lie_metric(geom, xi.value(chart, x), xi.deriv(chart, x)) - lam * geom.g


def curl_free_residual(chart: ChartMetric, chi: VectorFieldSpec, x) -> np.ndarray:
    """``nabla^i chi^j - nabla^j chi^i``; zero iff chi is locally a metric gradient."""
    geom = geometry(chart, x, curvature=False)
    return covariant_derivative_vector(geom, chi.value(chart, x), chi.deriv(chart, x)).curl


# ---------------------------------------------------------------------------
# catalogue of fields used by scenarios and tests


def translation(n: int, axis: int, amplitude: float = 1.0) -> VectorFieldSpec:
    e = np.zeros(n)
    e[axis] = amplitude

    def sym(xs):
        return [sp.Float(amplitude) if k == axis else sp.Integer(0) for k in range(n)]

    return VectorFieldSpec(
        value_fn=lambda x: np.broadcast_to(e, np.shape(x)).copy(),
        deriv_fn=lambda x: np.zeros(np.shape(x)[:-1] + (n, n)),
        sympy_fn=sym,
        label=f"translation[{axis}]",
    )


def rotation(n: int, a: int = 0, b: int = 1, center=None) -> VectorFieldSpec:
    """Rigid rotation in the (a, b) plane: ``zeta^a = -(x^b - c^b)``, ``zeta^b = x^a - c^a``."""
    c = np.zeros(n) if center is None else np.asarray(center, float)

    def val(x):
        x = np.asarray(x, float)
        out = np.zeros_like(x)
        out[..., a] = -(x[..., b] - c[b])
        out[..., b] = x[..., a] - c[a]
        return out

    def der(x):
        out = np.zeros(np.shape(x)[:-1] + (n, n))
        out[..., b, a] = -1.0
        out[..., a, b] = 1.0
        return out

    def sym(xs):
        comps = [sp.Integer(0)] * n
        comps[a] = -(xs[b] - sp.Float(c[b]))
        comps[b] = xs[a] - sp.Float(c[a])
        return comps

    return VectorFieldSpec(value_fn=val, deriv_fn=der, sympy_fn=sym, label=f"rotation[{a},{b}]")


def dilation(n: int, center=None, scale: float = 1.0) -> VectorFieldSpec:
    """``xi^i = scale (x^i - c^i)``; a homothety of flat space with lam = 2 scale."""
    c = np.zeros(n) if center is None else np.asarray(center, float)
    return VectorFieldSpec(
        value_fn=lambda x: scale * (np.asarray(x, float) - c),
        deriv_fn=lambda x: np.broadcast_to(scale * np.eye(n), np.shape(x)[:-1] + (n, n)).copy(),
        sympy_fn=lambda xs: [scale * (xs[k] - sp.Float(c[k])) for k in range(n)],
        label="dilation",
    )


def axial(n: int, axis: int = -1) -> VectorFieldSpec:
    """Coordinate field along ``axis`` (Killing for metrics independent of that coordinate)."""
    return translation(n, axis % n)


def polynomial_field(coeffs) -> VectorFieldSpec:
    """``zeta^i = sum_k coeffs[i, k, 0] x^k + coeffs[i, k, 1] (x^k)^2`` (generic non-Killing field)."""
    C = np.asarray(coeffs, float)
    n = C.shape[0]

    def val(x):
        x = np.asarray(x, float)
        return np.einsum("ik,...k->...i", C[..., 0], x) + np.einsum("ik,...k->...i", C[..., 1], x * x)

    def der(x):
        x = np.asarray(x, float)
        # partial_j zeta^i = C[i, j, 0] + 2 C[i, j, 1] x^j
        return np.swapaxes(C[..., 0], 0, 1) + 2.0 * np.einsum("ij,...j->...ji", C[..., 1], x)

    def sym(xs):
        return [sum(C[i, k, 0] * xs[k] + C[i, k, 1] * xs[k] ** 2 for k in range(n)) for i in range(n)]

    return VectorFieldSpec(value_fn=val, deriv_fn=der, sympy_fn=sym, label="polynomial")


def squared_coordinate_field(n: int, axis: int = 0) -> VectorFieldSpec:
    """``zeta^i = (x^axis)^2 delta^i_axis``."""
    C = np.zeros((n, n, 2))
    C[axis, axis, 1] = 1.0
    return polynomial_field(C)


def linear_potential(coeffs, offset: float = 0.0) -> ScalarFieldSpec:
    a = np.asarray(coeffs, float)
    n = a.size
    return ScalarFieldSpec(
        value_fn=lambda x: np.asarray(x, float) @ a + offset,
        grad_fn=lambda x: np.broadcast_to(a, np.shape(x)).copy(),
        hess_fn=lambda x: np.zeros(np.shape(x)[:-1] + (n, n)),
        sympy_fn=lambda xs: sum(sp.Float(a[k]) * xs[k] for k in range(n)) + offset,
        label="linear",
    )


def quadratic_potential(n: int, curvature: float = 1.0, center=None) -> ScalarFieldSpec:
    """``theta = curvature/2 |x - c|^2``; its gradient is a homothety with lam = 2 curvature."""
    c = np.zeros(n) if center is None else np.asarray(center, float)
    k = float(curvature)
    return ScalarFieldSpec(
        value_fn=lambda x: 0.5 * k * np.sum((np.asarray(x, float) - c) ** 2, axis=-1),
        grad_fn=lambda x: k * (np.asarray(x, float) - c),
        hess_fn=lambda x: np.broadcast_to(k * np.eye(n), np.shape(x)[:-1] + (n, n)).copy(),
        sympy_fn=lambda xs: sp.Rational(1, 2) * k * sum((xs[m] - sp.Float(c[m])) ** 2 for m in range(n)),
        label="quadratic",
    )


def gradient_field(psi: ScalarFieldSpec) -> VectorFieldSpec:
    return VectorFieldSpec(potential=psi, label=f"grad({psi.label})")


def catalogued_isometries(chart: ChartMetric) -> list:
    """Known Killing fields of the built-in charts."""
    n = chart.dim
    if chart.name in ("flat_torus",):
        return [translation(n, k) for k in range(n)]
    if chart.name == "flat_patch":
        out = [translation(n, k) for k in range(n)]
        out += [rotation(n, a, b) for a in range(n) for b in range(a + 1, n)]
        return out
    if chart.name in ("torus_of_revolution", "sphere"):
        return [axial(n, n - 1)]
    return []


_VECTOR_KINDS = ("translation", "rotation", "dilation", "axial", "polynomial", "squared_coordinate", "gradient")
_SCALAR_KINDS = ("linear", "quadratic")


def scalar_field_from_config(cfg: dict, n: int) -> ScalarFieldSpec:
    """``{kind = "linear", coeffs, offset}`` or ``{kind = "quadratic", curvature, center}``."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    if kind == "linear":
        coeffs = cfg.get("coeffs", [1.0] + [0.0] * (n - 1))
        if len(coeffs) != n:
            raise ValueError(f"linear potential needs {n} coefficients")
        return linear_potential(coeffs, float(cfg.get("offset", 0.0)))
    if kind == "quadratic":
        return quadratic_potential(n, float(cfg.get("curvature", 1.0)), cfg.get("center"))
    raise ValueError(f"unknown scalar field kind {kind!r}; known: {list(_SCALAR_KINDS)}")


def vector_field_from_config(cfg: dict, n: int) -> VectorFieldSpec:
    """Vector fields of the catalogue by ``kind`` (see ``_VECTOR_KINDS``)."""
    cfg = dict(cfg)
    kind = cfg.pop("kind", None)
    if kind == "translation":
        return translation(n, int(cfg.get("axis", 0)), float(cfg.get("amplitude", 1.0)))
    if kind == "rotation":
        return rotation(n, int(cfg.get("a", 0)), int(cfg.get("b", 1)), cfg.get("center"))
    if kind == "dilation":
        return dilation(n, cfg.get("center"), float(cfg.get("scale", 1.0)))
    if kind == "axial":
        return axial(n, int(cfg.get("axis", -1)))
    if kind == "polynomial":
        return polynomial_field(cfg["coeffs"])
    if kind == "squared_coordinate":
        return squared_coordinate_field(n, int(cfg.get("axis", 0)))
    if kind == "gradient":
        return gradient_field(scalar_field_from_config(cfg["potential"], n))
    raise ValueError(f"unknown vector field kind {kind!r}; known: {list(_VECTOR_KINDS)}")
