"""Triviality test: a density is trivial iff all its spatial Euler operators vanish."""

from __future__ import annotations

import numpy as np

from ..fluid.eos import Eos
from .densities import DensitySpec, TemplateDensity


def euler_operators(expr, jets, eos: Eos = None):
    """``(E_u, E_rho, E_S)`` of the density itself (not of its time derivative).

    Kinematic densities have no derivative dependence, so the operators reduce to
    the partials ``(T_u, T_rho, T_S)``.  Symbolic densities go through the
    symbolic Euler operator and may depend on derivatives.
    """
    from ..jetcheck.residuals import EulerResiduals
    from ..jetcheck.symbolic import SymbolicDensity

    if isinstance(expr, SymbolicDensity):
        return expr.euler(jets)
    if isinstance(expr, DensitySpec):
        expr = expr.expression()
    if not isinstance(expr, TemplateDensity):
        raise TypeError(f"cannot form Euler operators of {type(expr).__name__}")
    if eos is None:
        raise ValueError("kinematic densities need an equation of state to evaluate")
    p = expr.partials(jets.t, jets.x, jets.geom, jets.chart, jets.u, jets.rho, jets.S, eos)
    B = len(jets)
    return EulerResiduals(
        np.broadcast_to(p.T_u, (B, jets.dim)),
        np.broadcast_to(p.T_rho, (B,)),
        np.broadcast_to(p.T_S, (B,)),
    )


def is_trivial_density(expr, jets, eos: Eos = None, tol: float = 1e-10) -> bool:
    """True iff every Euler operator of ``expr`` is at most ``tol`` at every probe jet."""
    return euler_operators(expr, jets, eos).max_abs() <= tol
