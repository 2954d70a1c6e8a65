"""Classified kinematic densities, their fluxes, moving integrals and balance series."""

from .densities import (
    VARIANTS,
    ZERO_FLUX_VARIANTS,
    DensityExpression,
    DensityPartials,
    DensitySpec,
    Energy,
    FluxExpression,
    FluxPartials,
    GalileanEnergy,
    GalileanMomentum,
    Mass,
    Momentum,
    NonIsentropicEnergy,
    NonIsentropicMomentum,
    SimilarityEnergy,
    TemplateDensity,
    TemplateFlux,
    VolumetricEntropy,
    density_from_config,
    entropy_flux_function,
    scale_thermo,
    validate_spec,
)
from .evaluate import (
    bernoulli_potential,
    boundary_flux,
    circulation,
    circulation_endpoint_term,
    density_value,
    domain_integral,
    ensure_compatible,
    flux_vector,
    local_conservation_residual,
    sample_state,
)
from .series import (
    IntegralSeries,
    balance_series,
    circulation_balance,
    circulation_series,
    evaluate_series,
    flux_balance_series,
)
from .triviality import euler_operators, is_trivial_density

__all__ = [name for name in dir() if not name.startswith("_")]
