"""Effective dimension of weighted pre-Sobolev spaces and of concrete integrands."""
from .bounds import (
    EffDimReport,
    Mode,
    RhoStarResult,
    Sense,
    Tractability,
    component_variance_bound,
    critical_radius,
    effective_dimension_table,
    important_subsets,
    lambert_w0,
    product_dimension_bounds,
    superposition_asymptote,
    superposition_dimension_bound,
    superposition_growth_bound,
    tractability_class,
    truncation_dimension_bound,
)
from .decompose import (
    EXACT,
    FiniteDifference,
    VarianceDecomposition,
    anchored_component,
    anova_variances,
    ball_scaling,
    ball_tail_variance,
    closed_moment,
    effective_dimension,
    mean_dimension,
    norm_anova_gap,
    paskov_dimension,
    poincare_ratio,
    weighted_norm,
)
from .errors import EffDimError
from .estimators import SobolEstimate, closed_variance_pickfreeze, mean_dimension_mc, total_index_estimates
from .integrands import REGISTRY, Integrand, get_integrand, separable
from .quadrature import (
    Estimate,
    GaussTensor,
    Midpoint,
    MonteCarlo,
    RandomizedHalton,
    integrate,
    low_discrepancy_points,
    mc_qmc_rmse,
    tensor_rule,
)
from .subsets import Subset
from .weights import (
    INF,
    ConditionVerdict,
    Kind,
    WeightScheme,
    verify_cardinality_condition,
    verify_index_condition,
    weight_of,
)

__version__ = "0.1.0"
