"""Determining equations for kinematic conserved densities, evaluated on jets.

All formulas treat the jet coordinates as independent and use the fluid
equations to eliminate time derivatives.  Gradients are covariant
(``jet.du[b, j, i] = nabla_j u^i``); raised indices use ``g^{ij}`` at the jet's
base point.  Curvature follows ``[nabla_i, nabla_j] a^l = -R_ijk^l a^k``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, NamedTuple

import numpy as np

from ..fluid.eos import Eos, PressureData
from ..integrals.densities import DensityPartials, DensitySpec
from .jets import JetPoint


def _as_expr(expr):
    return expr.expression() if isinstance(expr, DensitySpec) else expr


def _as_flux(flux):
    return flux.flux() if isinstance(flux, DensitySpec) else flux


def density_partials(expr, jet: JetPoint, eos: Eos) -> DensityPartials:
    return _as_expr(expr).partials(jet.t, jet.x, jet.geom, jet.chart, jet.u, jet.rho, jet.S, eos)


@dataclass
class _Kin:
    """Jet quantities reused by several residuals."""

    p: DensityPartials
    d: PressureData
    ginv: np.ndarray
    g: np.ndarray
    div_u: np.ndarray
    up_du: np.ndarray  # [b, j, k] = nabla^j u^k
    up_rho: np.ndarray  # nabla^k rho
    up_S: np.ndarray
    div_Tu: np.ndarray  # nabla^i T_{u^i}
    Tuu_du: np.ndarray  # T_{u^i u^j} nabla^i u^j


def _kin(expr, jet: JetPoint, eos: Eos) -> _Kin:
    p = density_partials(expr, jet, eos)
    d = eos.pressure_data(jet.rho, jet.S)
    ginv, g = jet.geom.g_inv, jet.geom.g
    up_du = np.einsum("bjm,bmk->bjk", ginv, jet.du)
    return _Kin(
        p=p,
        d=d,
        ginv=ginv,
        g=g,
        div_u=np.einsum("bii->b", jet.du),
        up_du=up_du,
        up_rho=np.einsum("bij,bj->bi", ginv, jet.drho),
        up_S=np.einsum("bij,bj->bi", ginv, jet.dS),
        div_Tu=np.einsum("bik,bki->b", ginv, p.grad_T_u),
        Tuu_du=np.einsum("bij,bij->b", p.T_uu, up_du),
    )


def fluid_rates(jet: JetPoint, eos: Eos):
    """``(u_t^i, rho_t, S_t)`` implied by the fluid equations at each jet."""
    d = eos.pressure_data(jet.rho, jet.S)
    ginv = jet.geom.g_inv
    force = np.einsum("bij,bj->bi", ginv, d.P_rho[:, None] * jet.drho + d.P_S[:, None] * jet.dS) / jet.rho[:, None]
    u_t = -np.einsum("bj,bji->bi", jet.u, jet.du) - force
    rho_t = -(np.einsum("bi,bi->b", jet.u, jet.drho) + jet.rho * np.einsum("bii->b", jet.du))
    S_t = -np.einsum("bi,bi->b", jet.u, jet.dS)
    return u_t, rho_t, S_t


def material_time_derivative(expr, jet: JetPoint, eos: Eos) -> np.ndarray:
    """``D_t T = T_t + T_u . u_t + T_rho rho_t + T_S S_t`` on solutions."""
    p = density_partials(expr, jet, eos)
    u_t, rho_t, S_t = fluid_rates(jet, eos)
    return p.T_t + np.einsum("bi,bi->b", p.T_u, u_t) + p.T_rho * rho_t + p.T_S * S_t


class EulerResiduals(NamedTuple):
    E_u: np.ndarray  # (B, n), lower index
    E_rho: np.ndarray
    E_S: np.ndarray

    def max_abs(self) -> float:
        return float(max(np.max(np.abs(self.E_u)), np.max(np.abs(self.E_rho)), np.max(np.abs(self.E_S))))

    def per_jet(self) -> np.ndarray:
        return np.maximum(np.max(np.abs(self.E_u), axis=-1), np.maximum(np.abs(self.E_rho), np.abs(self.E_S)))


def euler_residuals(expr, jet: JetPoint, eos: Eos) -> EulerResiduals:
    """Closed-form spatial Euler operators of ``D_t T`` (first-order jets)."""
    k = _kin(expr, jet, eos)
    p, d = k.p, k.d
    rho = jet.rho
    P_rho, P_S = d.P_rho, d.P_S
    Q = rho[:, None] * P_rho[:, None] * p.T_uS - rho[:, None] * P_S[:, None] * p.T_urho + P_S[:, None] * p.T_u

    E_rho = (
        p.T_trho
        + np.einsum("bi,bi->b", jet.u, p.grad_T_rho)
        + P_rho / rho * k.div_Tu
        - rho * p.T_rhorho * k.div_u
        + P_rho / rho * k.Tuu_du
        + np.einsum("bk,bk->b", Q, k.up_S) / rho**2
    )
    E_S = (
        p.T_tS
        + np.einsum("bi,bi->b", jet.u, p.grad_T_S)
        + P_S / rho * k.div_Tu
        - np.einsum("bk,bk->b", Q, k.up_rho) / rho**2
        + P_S / rho * k.Tuu_du
        + (p.T_S - rho * p.T_rhoS) * k.div_u
    )
    r = rho[:, None]
    E_u = (
        p.T_tu
        + r * (p.grad_T_rho)
        + np.einsum("bj,bji->bi", jet.u, p.grad_T_u)
        + r * p.T_rhorho[:, None] * jet.drho
        - (P_rho / rho)[:, None] * np.einsum("bij,bj->bi", p.T_uu, k.up_rho)
        - (P_S / rho)[:, None] * np.einsum("bij,bj->bi", p.T_uu, k.up_S)
        + (r * p.T_rhoS[:, None] - p.T_S[:, None]) * jet.dS
        + (p.T_u - r * p.T_urho) * k.div_u[:, None]
        + np.einsum("bj,bij->bi", r * p.T_urho - p.T_u, jet.du)
    )
    return EulerResiduals(E_u, E_rho, E_S)


def determining_system_residuals(expr, jet: JetPoint, eos: Eos) -> Dict[str, np.ndarray]:
    """The seven split determining equations (coefficients of independent jet monomials)."""
    p = density_partials(expr, jet, eos)
    d = eos.pressure_data(jet.rho, jet.S)
    rho = jet.rho
    r = rho[:, None]
    g = jet.geom.g
    ginv = jet.geom.g_inv
    div_Tu = np.einsum("bik,bki->b", ginv, p.grad_T_u)
    P_rho, P_S = d.P_rho, d.P_S
    eqn1 = p.T_trho + np.einsum("bi,bi->b", jet.u, p.grad_T_rho) + P_rho / rho * div_Tu
    eqn2 = r * P_rho[:, None] * p.T_uS - r * P_S[:, None] * p.T_urho + P_S[:, None] * p.T_u
    eqn3 = (rho**2 * p.T_rhorho)[:, None, None] * g - P_rho[:, None, None] * p.T_uu
    eqn4 = p.T_tS + np.einsum("bi,bi->b", jet.u, p.grad_T_S) + P_S / rho * div_Tu
    eqn5 = (P_S / rho)[:, None, None] * p.T_uu + g * (p.T_S - rho * p.T_rhoS)[:, None, None]
    eqn6 = p.T_tu + r * p.grad_T_rho + np.einsum("bj,bjk->bk", jet.u, p.grad_T_u)
    a = p.T_u - r * p.T_urho  # T_{u^i} - rho T_{u^i rho}
    eqn7 = np.einsum("bjk,bi->bijk", g, a) - np.einsum("bij,bk->bijk", g, a)
    return {"Teqn1": eqn1, "Teqn2": eqn2, "Teqn3": eqn3, "Teqn4": eqn4, "Teqn5": eqn5, "Teqn6": eqn6, "Teqn7": eqn7}


def recombine_determining(report: Dict[str, np.ndarray], jet: JetPoint) -> EulerResiduals:
    """Rebuild the Euler residuals from the split equations and the jet monomials."""
    rho = jet.rho
    ginv = jet.geom.g_inv
    up_du = np.einsum("bjm,bmk->bjk", ginv, jet.du)
    up_rho = np.einsum("bij,bj->bi", ginv, jet.drho)
    up_S = np.einsum("bij,bj->bi", ginv, jet.dS)
    E_rho = (
        report["Teqn1"]
        + np.einsum("bk,bk->b", report["Teqn2"], up_S) / rho**2
        - np.einsum("bjk,bjk->b", report["Teqn3"], up_du) / rho
    )
    E_S = (
        report["Teqn4"]
        - np.einsum("bk,bk->b", report["Teqn2"], up_rho) / rho**2
        + np.einsum("bjk,bjk->b", report["Teqn5"], up_du)
    )
    E_u = (
        report["Teqn6"]
        + np.einsum("bij,bj->bi", report["Teqn3"], up_rho) / rho[:, None]
        - np.einsum("bij,bj->bi", report["Teqn5"], up_S)
        + np.einsum("bijk,bjk->bi", report["Teqn7"], up_du)
    )
    return EulerResiduals(E_u, E_rho, E_S)


def max_split_residual(report: Dict[str, np.ndarray]) -> float:
    return float(max(np.max(np.abs(v)) for v in report.values()))


def flux_consistency(expr, flux, jet: JetPoint, eos: Eos) -> np.ndarray:
    """``D_t T + D_i (T u^i) + D_i Phi^i`` with total derivatives through the jet."""
    p = density_partials(expr, jet, eos)
    DtT = material_time_derivative(expr, jet, eos)
    DiT = (
        p.grad_T
        + np.einsum("bk,bik->bi", p.T_u, jet.du)
        + p.T_rho[:, None] * jet.drho
        + p.T_S[:, None] * jet.dS
    )
    div_Tu = np.einsum("bi,bi->b", jet.u, DiT) + p.T * np.einsum("bii->b", jet.du)
    fl = _as_flux(flux)
    if fl is None:
        return DtT + div_Tu
    q = fl.partials(jet.t, jet.x, jet.geom, jet.chart, jet.u, jet.rho, jet.S, eos)
    div_Phi = (
        q.div_explicit
        + np.einsum("bik,bik->b", q.Phi_u, jet.du)
        + np.einsum("bi,bi->b", q.Phi_rho, jet.drho)
        + np.einsum("bi,bi->b", q.Phi_S, jet.dS)
    )
    return DtT + div_Tu + div_Phi
