"""The fluid Hamiltonian operator on grid fields and the density-to-symmetry map.

A variational triple ``(a, b, c) = (dT/du, dT/drho, dT/dS)`` is sent to

* ``u_dot^i = rho^-1 curl^{ij} a_j - nabla^i b + rho^-1 nabla^i S c``
* ``rho_dot = -nabla_i (g^{ij} a_j)``
* ``S_dot   = -rho^-1 nabla^i S a_i``

with ``curl^{ij} = nabla^i u^j - nabla^j u^i``.  With the energy triple this
reproduces the Euler right-hand side.  Symmetry generators are ``-H`` applied
to a triple, evaluated pointwise through the chain rule so that Casimirs give
exact zeros.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, NamedTuple, Optional

import numpy as np

from ..errors import SeriesError, StateError
from ..fluid.eos import Eos
from ..fluid.state import FluidState
from ..integrals.densities import DensitySpec, Energy, TemplateDensity
from ..solver.euler import Rates, euler_rhs, grid_ops
from ..solver.stencils import GridOps


@dataclass(frozen=True)
class VariationalTriple:
    """``a = dT/du`` (covector), ``b = dT/drho``, ``c = dT/dS`` on the grid."""

    a: np.ndarray
    b: np.ndarray
    c: np.ndarray


@dataclass(frozen=True)
class SymmetryGenerator:
    """Characteristic components ``(eta^u, eta^rho, eta^S)`` of an evolutionary symmetry."""

    u: np.ndarray
    rho: np.ndarray
    S: np.ndarray
    label: str = "eta"

    def is_finite(self) -> bool:
        return bool(np.all(np.isfinite(self.u)) and np.all(np.isfinite(self.rho)) and np.all(np.isfinite(self.S)))

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.u)), np.max(np.abs(self.rho)), np.max(np.abs(self.S))))

    def is_zero(self) -> bool:
        return not (np.any(self.u) or np.any(self.rho) or np.any(self.S))


def _expr(spec) -> TemplateDensity:
    return spec.expression() if isinstance(spec, DensitySpec) else spec


def _partials(spec, state: FluidState, eos: Eos):
    grid = state.grid
    return _expr(spec).partials(state.t, grid.coords, grid.geometry, grid.chart, state.u, state.rho, state.S, eos)


def _ops(state: FluidState, order: int, ops: Optional[GridOps]) -> GridOps:
    return ops or grid_ops(state.grid, order)


def variational_triple(spec, state: FluidState, eos: Eos) -> VariationalTriple:
    """Pointwise ``(T_u, T_rho, T_S)`` of a kinematic density."""
    p = _partials(spec, state, eos)
    shp = state.rho.shape
    return VariationalTriple(
        np.broadcast_to(p.T_u, shp + (state.grid.dim,)).copy(),
        np.broadcast_to(p.T_rho, shp).copy(),
        np.broadcast_to(p.T_S, shp).copy(),
    )


def apply_hamiltonian(triple: VariationalTriple, state: FluidState, order: int = 2, ops: Optional[GridOps] = None) -> Rates:
    """Grid evaluation of the Hamiltonian operator on a triple."""
    if np.any(state.rho <= 0):
        raise StateError("the Hamiltonian operator needs positive density")
    ops = _ops(state, order, ops)
    rho = state.rho
    curl = ops.curl(state.u)
    up_S = ops.metric_grad(state.S)
    a_up = ops.raise_index(triple.a)
    u_dot = (
        np.einsum("...ij,...j->...i", curl, triple.a) / rho[..., None]
        - ops.metric_grad(triple.b)
        + up_S * (triple.c / rho)[..., None]
    )
    rho_dot = -ops.div(a_up)
    S_dot = -np.einsum("...i,...i->...", up_S, triple.a) / rho
    return Rates(u_dot, rho_dot, S_dot)


def hamiltonian_flow_residual(state: FluidState, eos: Eos, order: int = 2) -> float:
    """Max-norm difference between ``H(energy triple)`` and the Euler right-hand side."""
    ops = grid_ops(state.grid, order)
    ham = apply_hamiltonian(variational_triple(Energy(), state, eos), state, ops=ops)
    rhs = euler_rhs(state, eos, ops=ops)
    return float(max(np.max(np.abs(x - y)) for x, y in zip(ham, rhs)))


def symmetry_from_density(spec, state: FluidState, eos: Eos, order: int = 2, ops: Optional[GridOps] = None) -> SymmetryGenerator:
    """``eta = -H (dT/du, dT/drho, dT/dS)`` through the chain rule on grid gradients."""
    ops = _ops(state, order, ops)
    p = _partials(spec, state, eos)
    du = ops.cov_grad_vector(state.u)  # [..., k, m] = nabla_k u^m
    drho = ops.grad(state.rho)
    dS = ops.grad(state.S)
    curl = ops.curl(state.u)
    a_rho = p.Tu_over_rho
    # total covariant gradient of T_rho
    grad_b = (
        p.grad_T_rho
        + np.einsum("...m,...km->...k", p.T_urho, du)
        + p.T_rhorho[..., None] * drho
        + (p.T_rhoS - p.TS_over_rho)[..., None] * dS
    )
    eta_u = -np.einsum("...ij,...j->...i", curl, a_rho) + ops.raise_index(grad_b)
    # total covariant divergence of T_u raised
    ginv = ops.geom.g_inv
    grad_a = (
        p.grad_T_u
        + np.einsum("...jm,...im->...ij", p.T_uu, du)
        + p.T_urho[..., None, :] * drho[..., :, None]
        + p.T_uS[..., None, :] * dS[..., :, None]
    )  # [..., i, j] = total nabla_i T_{u^j}
    eta_rho = np.einsum("...ij,...ij->...", ginv, grad_a)
    eta_S = np.einsum("...j,...j->...", a_rho, ops.raise_index(dS))
    label = getattr(spec, "label", "T")
    return SymmetryGenerator(eta_u, eta_rho, eta_S, f"eta[{label}]")


def _linearised_residual(gen_prev, gen, gen_next, dt2: float, state: FluidState, eos: Eos, ops: GridOps):
    u, rho, S = state.u, state.rho, state.S
    eu, er, es = gen.u, gen.rho, gen.S
    d = eos.pressure_data(rho, S)
    du = ops.cov_grad_vector(u)
    deu = ops.cov_grad_vector(eu)
    gradP = ops.metric_grad(d.P)
    R_u = (
        (gen_next.u - gen_prev.u) / dt2
        + np.einsum("...j,...ji->...i", u, deu)
        + np.einsum("...j,...ji->...i", eu, du)
        - (er / rho**2)[..., None] * gradP
        + ops.metric_grad(d.P_rho * er + d.P_S * es) / rho[..., None]
    )
    R_rho = (gen_next.rho - gen_prev.rho) / dt2 + ops.div(er[..., None] * u + rho[..., None] * eu)
    R_S = (
        (gen_next.S - gen_prev.S) / dt2
        + np.einsum("...i,...i->...", eu, ops.grad(S))
        + np.einsum("...i,...i->...", u, ops.grad(es))
    )
    return float(max(np.max(np.abs(R_u)), np.max(np.abs(R_rho)), np.max(np.abs(R_S))))


def symmetry_determining_residual(
    generator: Callable[[FluidState], SymmetryGenerator], snapshots: Iterable, eos: Eos, order: int = 2
) -> float:
    """Max over interior snapshots of the linearised fluid equations applied to ``generator``.

    ``generator`` maps a state to its symmetry components.  Time derivatives of
    the components are centred differences across neighbouring snapshots, which
    must be uniformly spaced.
    """
    states = [getattr(s, "state", s) for s in snapshots]
    if len(states) < 3:
        raise SeriesError("need at least 3 snapshots for centred time differences")
    times = np.array([s.t for s in states])
    steps = np.diff(times)
    if np.any(steps <= 0) or np.max(np.abs(steps - steps[0])) > 1e-9 * steps[0]:
        raise SeriesError("snapshot times must be uniformly spaced and increasing")
    ops = grid_ops(states[0].grid, order)
    gens = [generator(s) for s in states]
    worst = 0.0
    for k in range(1, len(states) - 1):
        r = _linearised_residual(gens[k - 1], gens[k], gens[k + 1], times[k + 1] - times[k - 1], states[k], eos, ops)
        worst = max(worst, r)
    return worst


def density_generator(spec, eos: Eos, order: int = 2) -> Callable[[FluidState], SymmetryGenerator]:
    return lambda state: symmetry_from_density(spec, state, eos, order)


class Pairing(NamedTuple):
    lhs: float
    rhs: float
    scale: float


def _pairing_density(A: VariationalTriple, B: Rates) -> np.ndarray:
    return np.einsum("...i,...i->...", A.a, B.u) + A.b * B.rho + A.c * B.S


def pairing(A: VariationalTriple, B: Rates, state: FluidState, ops: GridOps) -> float:
    """``int (a_i B_u^i + b B_rho + c B_S) sqrt(g) dx``."""
    return ops.integrate(_pairing_density(A, B))


def antisymmetry_defect(A: VariationalTriple, B: VariationalTriple, state: FluidState, order: int = 2) -> Pairing:
    """``(<A, H B>, <B, H A>, scale)``; antisymmetry means the first two sum to ~0.

    ``scale`` integrates the absolute pairing densities, so it stays meaningful
    when both pairings vanish (Poisson-commuting functionals).
    """
    ops = grid_ops(state.grid, order)
    HA = apply_hamiltonian(A, state, ops=ops)
    HB = apply_hamiltonian(B, state, ops=ops)
    lhs = pairing(A, HB, state, ops)
    rhs = pairing(B, HA, state, ops)
    scale = max(ops.integrate(np.abs(_pairing_density(A, HB))), ops.integrate(np.abs(_pairing_density(B, HA))), 1e-300)
    return Pairing(lhs, rhs, scale)
