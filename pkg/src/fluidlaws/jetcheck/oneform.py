"""Transport of the vorticity two-form ``omega = d(u_flat)`` on second-order jets.

The residual ``partial_t omega + L_u omega`` is evaluated with the time
derivative eliminated through the fluid equations.  On solutions it reduces to
``rho^-2 P_S (d rho ^ d S)``, so it vanishes identically exactly when the
equation of state is barotropic.
"""

from __future__ import annotations

import numpy as np

from ..fluid.eos import Eos
from .jets import JetPoint


def _require_order2(jet: JetPoint):
    if jet.order != 2:
        raise ValueError("the vorticity residual needs second-order jets")


def _velocity_rate_gradient(jet: JetPoint, eos: Eos) -> np.ndarray:
    """``[b, i, k] = nabla_i (u_t)^k`` on solutions."""
    d = eos.pressure_data(jet.rho, jet.S)
    rho = jet.rho
    ginv = jet.geom.g_inv
    up_rho = np.einsum("bkl,bl->bk", ginv, jet.drho)
    up_S = np.einsum("bkl,bl->bk", ginv, jet.dS)
    a = d.P_rho / rho
    b = d.P_S / rho
    da = (-d.P_rho / rho**2 + d.P_rhorho / rho)[:, None] * jet.drho + (d.P_rhoS / rho)[:, None] * jet.dS
    db = (-d.P_S / rho**2 + d.P_rhoS / rho)[:, None] * jet.drho + (d.P_SS / rho)[:, None] * jet.dS
    return -(
        np.einsum("bim,bmk->bik", jet.du, jet.du)
        + np.einsum("bm,bimk->bik", jet.u, jet.hu)
        + np.einsum("bi,bk->bik", da, up_rho)
        + a[:, None, None] * np.einsum("bkl,bil->bik", ginv, jet.hrho)
        + np.einsum("bi,bk->bik", db, up_S)
        + b[:, None, None] * np.einsum("bkl,bil->bik", ginv, jet.hS)
    )


def vorticity(jet: JetPoint) -> np.ndarray:
    """``omega_ij = nabla_i u_j - nabla_j u_i``."""
    low = np.einsum("bik,bkj->bij", jet.du, jet.geom.g)
    return low - low.swapaxes(1, 2)


def _vorticity_gradient(jet: JetPoint) -> np.ndarray:
    """``[b, k, i, j] = nabla_k omega_ij``."""
    low = np.einsum("bkim,bmj->bkij", jet.hu, jet.geom.g)
    return low - low.swapaxes(2, 3)


def _vorticity_rate(jet: JetPoint, eos: Eos) -> np.ndarray:
    rate = np.einsum("bik,bkj->bij", _velocity_rate_gradient(jet, eos), jet.geom.g)
    return rate - rate.swapaxes(1, 2)


def oneform_residual(jet: JetPoint, eos: Eos, route: str = "geometric") -> np.ndarray:
    """Antisymmetric ``[b, i, j]`` residual of ``partial_t omega + L_u omega``.

    ``route="geometric"`` uses Cartan's formula ``L_u omega = d(u _| omega)``;
    ``route="index"`` expands the Lie derivative of a two-form in components.
    The two agree only when the jet obeys the curvature constraint.
    """
    _require_order2(jet)
    w = vorticity(jet)
    dw = _vorticity_gradient(jet)
    rate = _vorticity_rate(jet, eos)
    if route == "geometric":
        # nabla_i (u^k omega_kj)
        grad_contr = np.einsum("bik,bkj->bij", jet.du, w) + np.einsum("bk,bikj->bij", jet.u, dw)
        return rate + grad_contr - grad_contr.swapaxes(1, 2)
    if route == "index":
        return (
            rate
            + np.einsum("bk,bkij->bij", jet.u, dw)
            + np.einsum("bkj,bik->bij", w, jet.du)
            + np.einsum("bik,bjk->bij", w, jet.du)
        )
    raise ValueError(f"unknown route '{route}'")


def baroclinic_oracle(jet: JetPoint, eos: Eos) -> np.ndarray:
    """Closed form ``rho^-2 P_S (nabla_i rho nabla_j S - nabla_j rho nabla_i S)``."""
    d = eos.pressure_data(jet.rho, jet.S)
    wedge = np.einsum("bi,bj->bij", jet.drho, jet.dS)
    return (d.P_S / jet.rho**2)[:, None, None] * (wedge - wedge.swapaxes(1, 2))


def max_oneform_residual(jet: JetPoint, eos: Eos, route: str = "geometric") -> float:
    return float(np.max(np.abs(oneform_residual(jet, eos, route))))
