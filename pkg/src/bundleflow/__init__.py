"""Curvature tensors and reduced Ricci-flow dynamics of circle-bundle metrics.

Evaluates the Levi-Civita connection, curvature 2-forms, Ricci tensor and
scalar curvature of connection metrics on principal circle bundles over
surfaces in an adapted orthonormal frame; integrates the reduced flow ODE
systems for constant-curvature bases with adaptive error control,
singularity and convergence detection; provides closed-form solutions, a
transcendental first integral and a model-geometry classifier; and verifies
the frame formulas against finite-difference curvature computations on
explicit coordinate charts.
"""

from .closed_form import (
    AsymptoticPrediction,
    GeometryClass,
    ImplicitConstants,
    asymptotic_prediction,
    classify,
    implicit_constants,
    implicit_first_integral,
    nil_solution,
    product_flat_scalar_curvature,
    product_flat_solution,
    spherical_unnormalized_solution,
)
from .errors import (
    ChartDomainError,
    DomainError,
    IntegrationFailure,
    InvalidInputError,
    NumericalError,
    SingularTimeError,
)
from .flow_ode import (
    chern_curvature_constant,
    integrate,
    rhs,
    rhs_normalized,
    rhs_unnormalized,
    scalar_curvature_observable,
)
from .frame_geometry import (
    ConnectionCoefficients,
    CurvatureComponents,
    FramePointData,
    RicciMatrix,
    curvature_form,
    levi_civita,
    ricci,
    ricci_yang_mills,
    scalar_curvature,
)
from .oracle import (
    CoordinateMetric,
    FamilyParams,
    OracleReport,
    berger_metric,
    finite_difference_christoffel,
    finite_difference_ricci,
    grid_points,
    ricci_in_adapted_frame,
    standard_suite,
    suite_passes,
    torus_bundle_metric,
    verify_frame_formulas,
)
from .state import (
    FlowParams,
    FlowState,
    FlowVariant,
    IntegratorConfig,
    Termination,
    TerminationKind,
    Trajectory,
    TrajectorySample,
)

__version__ = "0.1.0"

__all__ = [
    "AsymptoticPrediction",
    "ChartDomainError",
    "ConnectionCoefficients",
    "CoordinateMetric",
    "CurvatureComponents",
    "DomainError",
    "FamilyParams",
    "FlowParams",
    "FlowState",
    "FlowVariant",
    "FramePointData",
    "GeometryClass",
    "ImplicitConstants",
    "IntegrationFailure",
    "IntegratorConfig",
    "InvalidInputError",
    "NumericalError",
    "OracleReport",
    "RicciMatrix",
    "SingularTimeError",
    "Termination",
    "TerminationKind",
    "Trajectory",
    "TrajectorySample",
    "asymptotic_prediction",
    "berger_metric",
    "chern_curvature_constant",
    "classify",
    "curvature_form",
    "finite_difference_christoffel",
    "finite_difference_ricci",
    "grid_points",
    "implicit_constants",
    "implicit_first_integral",
    "integrate",
    "levi_civita",
    "nil_solution",
    "product_flat_scalar_curvature",
    "product_flat_solution",
    "ricci",
    "ricci_in_adapted_frame",
    "ricci_yang_mills",
    "rhs",
    "rhs_normalized",
    "rhs_unnormalized",
    "scalar_curvature",
    "scalar_curvature_observable",
    "spherical_unnormalized_solution",
    "standard_suite",
    "suite_passes",
    "torus_bundle_metric",
    "verify_frame_formulas",
]
