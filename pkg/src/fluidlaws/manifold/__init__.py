"""Riemannian chart geometry: metric, connection, curvature, Killing residuals."""

from .builtin import (
    ALIASES,
    CHARTS,
    flat_patch,
    flat_torus,
    interior_sample,
    make_chart,
    reference_scalar_curvature,
    sphere,
    torus_of_revolution,
)
from .chart import (
    ChartMetric,
    GeometryEval,
    christoffel,
    christoffel_derivative,
    curvature_identity_defects,
    geometry,
    metric,
    metric_derivative,
    riemann,
    riemann_from,
)
from .fields import (
    ScalarFieldSpec,
    VectorDerivative,
    VectorFieldSpec,
    axial,
    catalogued_isometries,
    covariant_derivative_vector,
    covariant_hessian_scalar,
    curl_free_residual,
    dilation,
    gradient_field,
    homothety_residual,
    killing_residual,
    linear_potential,
    lower,
    polynomial_field,
    potential_consistency,
    quadratic_potential,
    raise_index,
    rotation,
    scalar_field_from_config,
    squared_coordinate_field,
    translation,
    vector_field_from_config,
)

__all__ = [name for name in dir() if not name.startswith("_")]
