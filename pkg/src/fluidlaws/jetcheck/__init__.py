"""Determining equations of kinematic conservation laws evaluated on random jets."""

from .jets import JetPoint, jet_at, sample_jets
from .oneform import baroclinic_oracle, max_oneform_residual, oneform_residual, vorticity
from .residuals import (
    EulerResiduals,
    density_partials,
    determining_system_residuals,
    euler_residuals,
    flux_consistency,
    fluid_rates,
    material_time_derivative,
    max_split_residual,
    recombine_determining,
)
from .suites import (
    FAIL_TOL,
    PASS_TOL,
    Pairing,
    PairingResult,
    eos_catalogue,
    evaluate_pairing,
    gap_violations,
    negative_pairings,
    oneform_suite,
    positive_pairings,
    run_suite,
)
from .symbolic import SymbolicDensity, SymbolicJetSpace, random_divergence, symbolic_density, symbolic_euler_residuals

__all__ = [name for name in dir() if not name.startswith("_")]
