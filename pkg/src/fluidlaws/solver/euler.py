"""Covariant compressible Euler right-hand side and classical RK4 stepping."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from ..errors import CFLError, StateError
from ..fluid.eos import Eos
from ..fluid.state import FluidState
from .stencils import GridOps


@dataclass(frozen=True)
class SolverConfig:
    dt: float
    t_end: float = 1.0
    cfl_target: float = 0.5
    order: int = 2
    snapshot_every: int = 1

    def __post_init__(self):
        if not (self.dt > 0 and np.isfinite(self.dt)):
            raise ValueError("dt must be positive")
        if not (0 < self.cfl_target <= 1):
            raise ValueError("cfl_target must lie in (0, 1]")
        if self.order not in (2, 4):
            raise ValueError("order must be 2 or 4")
        if self.snapshot_every < 1:
            raise ValueError("snapshot_every must be >= 1")
        if self.t_end < 0:
            raise ValueError("t_end must be non-negative")

    @property
    def n_steps(self) -> int:
        steps = self.t_end / self.dt
        k = int(round(steps))
        if abs(steps - k) > 1e-9 * max(1.0, steps):
            raise ValueError(f"t_end={self.t_end} is not an integer multiple of dt={self.dt}")
        return k


class Rates(NamedTuple):
    u: np.ndarray
    rho: np.ndarray
    S: np.ndarray


_OPS_CACHE: dict = {}


def grid_ops(grid, order: int) -> GridOps:
    key = (id(grid), order)
    ops = _OPS_CACHE.get(key)
    if ops is None or ops.grid is not grid:
        ops = GridOps(grid, order)
        if len(_OPS_CACHE) > 32:
            _OPS_CACHE.clear()
        _OPS_CACHE[key] = ops
    return ops


def euler_rhs(state: FluidState, eos: Eos, order: int = 2, ops: Optional[GridOps] = None) -> Rates:
    """Time derivatives of ``(u^i, rho, S)``.

    * ``du^i/dt = -u^j nabla_j u^i - rho^-1 g^{ij} (P_rho d_j rho + P_S d_j S)``
    * ``drho/dt = -(1/sqrt g) d_i (sqrt g rho u^i)``
    * ``dS/dt   = -u^i d_i S``
    """
    state.validate()
    ops = ops or grid_ops(state.grid, order)
    u, rho, S = state.u, state.rho, state.S
    _, P_rho, P_S = eos.pressure(rho, S)
    grad_u = ops.cov_grad_vector(u)
    drho = ops.grad(rho)
    dS = ops.grad(S)
    adv = np.einsum("...j,...ji->...i", u, grad_u)
    force = ops.raise_index(P_rho[..., None] * drho + P_S[..., None] * dS) / rho[..., None]
    u_t = -adv - force
    rho_t = -ops.div(rho[..., None] * u)
    S_t = -np.einsum("...i,...i->...", u, dS)
    out = Rates(u_t, rho_t, S_t)
    for name, arr in zip(out._fields, out):
        if not np.all(np.isfinite(arr)):
            raise StateError(f"non-finite d{name}/dt at t={state.t:.6g}")
    return out


def stable_dt(state: FluidState, eos: Eos, cfl_target: float) -> float:
    """Largest step with ``dt <= cfl * min(h_phys / (|u| + c_s))``."""
    geom = state.grid.geometry
    h = state.grid.spacing
    hphys = np.min(h * np.sqrt(np.einsum("...ii->...i", geom.g)), axis=-1)
    speed = np.sqrt(np.einsum("...i,...ij,...j->...", state.u, geom.g, state.u))
    cs = np.sqrt(eos.sound_speed_sq(state.rho, state.S))
    denom = speed + cs
    with np.errstate(divide="ignore"):
        bound = np.where(denom > 0, hphys / np.where(denom > 0, denom, 1.0), np.inf)
    return float(cfl_target * np.min(bound))


def check_cfl(state: FluidState, eos: Eos, cfg: SolverConfig) -> None:
    limit = stable_dt(state, eos, cfg.cfl_target)
    if cfg.dt > limit:
        raise CFLError(
            f"dt={cfg.dt:.4g} exceeds the CFL bound {limit:.4g} (cfl_target={cfg.cfl_target}) at t={state.t:.6g}; "
            f"suggested dt <= {limit:.4g}",
            suggested_dt=limit,
        )


def _axpy(state: FluidState, rates: Rates, a: float) -> FluidState:
    return state.with_fields(
        u=state.u + a * rates.u, rho=state.rho + a * rates.rho, S=state.S + a * rates.S, t=state.t + a
    )


def step(state: FluidState, eos: Eos, cfg: SolverConfig, check: bool = True) -> FluidState:
    """One classical fourth-order Runge-Kutta step of size ``cfg.dt``."""
    if check:
        check_cfl(state, eos, cfg)
    dt = cfg.dt
    ops = grid_ops(state.grid, cfg.order)
    k1 = euler_rhs(state, eos, ops=ops)
    k2 = euler_rhs(_axpy(state, k1, 0.5 * dt), eos, ops=ops)
    k3 = euler_rhs(_axpy(state, k2, 0.5 * dt), eos, ops=ops)
    k4 = euler_rhs(_axpy(state, k3, dt), eos, ops=ops)
    w = dt / 6.0
    return state.with_fields(
        u=state.u + w * (k1.u + 2.0 * k2.u + 2.0 * k3.u + k4.u),
        rho=state.rho + w * (k1.rho + 2.0 * k2.rho + 2.0 * k3.rho + k4.rho),
        S=state.S + w * (k1.S + 2.0 * k2.S + 2.0 * k3.S + k4.S),
        t=state.t + dt,
    ).validate()
