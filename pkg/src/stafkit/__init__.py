"""State-following kernel approximation toolkit.

Moving-center exponential-kernel bases, ideal-weight computation, the
exact-line-search weight-chase loop, constructive monomial-to-kernel
approximants, and an online kernel ADP loop for a regulator benchmark.
"""

from .adp import (
    AdpConfig,
    AdpState,
    AdpTrace,
    CostSpec,
    DivergenceError,
    ValueModel,
    bellman_error,
    bellman_error_critic_gradient,
    control_hat,
    grad_value_hat,
    hjb_residual,
    run_adp,
    unit_cost,
    value_hat,
)
from .centers import CenterMap, adp_centers, eval_centers, polygon_centers, triangle_centers
from .chase import (
    ChaseConfig,
    ChaseState,
    ChaseTrace,
    chase_step,
    evaluate_approximant,
    gradient,
    kantorovich_factor,
    optimal_step,
    run_chase,
)
from .dynamics import (
    DynamicalSystem,
    circular_system,
    closed_loop_field,
    regulator_optimal_control,
    regulator_optimal_value,
    regulator_optimal_value_gradient,
    regulator_system,
    rk4_field_step,
    rk4_step,
)
from .expbounds import (
    MonomialApproximant,
    MultiIndex,
    center_count_bound,
    monomial_approximant,
    polynomial_to_exponential,
    shifted_approximant,
)
from .rkhs import (
    ConditioningError,
    DegeneracyError,
    ExponentialKernel,
    GramMatrix,
    build_gram,
    exponential_kernel,
    ideal_weights_gram_schmidt,
    ideal_weights_solve,
    rkhs_error_quadratic,
    sample_target,
)

__version__ = "0.1.0"

__all__ = [
    "AdpConfig",
    "AdpState",
    "AdpTrace",
    "CenterMap",
    "ChaseConfig",
    "ChaseState",
    "ChaseTrace",
    "ConditioningError",
    "CostSpec",
    "DegeneracyError",
    "DivergenceError",
    "DynamicalSystem",
    "ExponentialKernel",
    "GramMatrix",
    "MonomialApproximant",
    "MultiIndex",
    "ValueModel",
    "adp_centers",
    "bellman_error",
    "bellman_error_critic_gradient",
    "build_gram",
    "center_count_bound",
    "chase_step",
    "circular_system",
    "closed_loop_field",
    "control_hat",
    "eval_centers",
    "evaluate_approximant",
    "exponential_kernel",
    "grad_value_hat",
    "gradient",
    "hjb_residual",
    "ideal_weights_gram_schmidt",
    "ideal_weights_solve",
    "kantorovich_factor",
    "monomial_approximant",
    "optimal_step",
    "polygon_centers",
    "polynomial_to_exponential",
    "regulator_optimal_control",
    "regulator_optimal_value",
    "regulator_optimal_value_gradient",
    "regulator_system",
    "rk4_field_step",
    "rk4_step",
    "rkhs_error_quadratic",
    "run_adp",
    "run_chase",
    "sample_target",
    "shifted_approximant",
    "triangle_centers",
    "unit_cost",
    "value_hat",
]
