"""Equation-of-state algebra and grid-resident fluid state."""

from .eos import (
    RHO_REF,
    Eos,
    PressureData,
    barotropic,
    eos_from_config,
    general_eos,
    isobaric_entropy,
    polytropic,
    special_exponent,
)
from .expressions import (
    ConstantField,
    Exp,
    Expr,
    GaussianField,
    ModeField,
    Poly,
    Scaled,
    Sin,
    SumField,
    const,
    expr_from_config,
    field_from_config,
    gauss_integral,
)
from .state import FluidState, Grid, load_npz, state_from_fields, uniform_state


def pressure(eos: Eos, rho, S):
    """``(P, P_rho, P_S)`` for the given equation of state."""
    return eos.pressure(rho, S)


def internal_energy(eos: Eos, rho, S, method: str = "closed"):
    """Specific internal energy ``e(rho, S)``."""
    return eos.internal_energy(rho, S, method)


__all__ = [name for name in dir() if not name.startswith("_")]
