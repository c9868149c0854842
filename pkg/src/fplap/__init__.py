"""Numerical toolkit for the fractional p-Laplacian.

Evaluates the operator pointwise by principal-value quadrature, computes the
closed-form constants of one-sided power profiles, verifies barrier and
supersolution inequalities, solves desk-scale exterior-zero Dirichlet
problems with boundary-exponent fitting, and reproduces the quantitative
scaling estimates behind the boundary-derivative (Hopf-type) statement for
reflection differences.
"""

from .errors import ConfigError, QuadratureError
from .fields import (
    FracParams,
    ScalarField,
    TailModel,
    combine_fields,
    constant_field,
    dilate_field,
    gaussian_mixture_field,
    halfspace_power_field,
    random_smooth_field,
    scale_field,
    translate_field,
)
from .operator import EvalResult, eval_profile_nd, eval_pv, eval_symmetrized, signed_power
from .quadrature import QuadratureSpec, aitken_limit
from .constants import EigenConstants, c_nu, c_nu_n, left_tail_term, verify_halfspace_eigen
from .barrier import (
    BarrierSpec,
    barrier_lower_bound_check,
    combined_barrier_field,
    cutoff_field,
    cutoff_gradient_bound,
    g_field,
    g_supersolution_check,
    phi,
    phi_field,
    rescale_supersolution,
    scaled_limit_scan,
)
from .dirichlet import (
    ComparisonReport,
    DiscreteOperator,
    Domain1D,
    ExponentFit,
    GradedGrid,
    SolveResult,
    comparison_check,
    discretize,
    fit_boundary_exponent,
    interpolant_field,
    linear_reference_solve,
    make_graded_grid,
    solve,
)
from .hopf import (
    HalfSpaceSetup,
    RegionSet,
    delta_scaling_scan,
    flattened_test_field,
    monotone_test_field,
    normal_derivative,
    reflect,
    reflected_field,
    split_I_II,
    w_lambda,
)

__version__ = "0.1.0"

__all__ = [
    "BarrierSpec",
    "ComparisonReport",
    "ConfigError",
    "DiscreteOperator",
    "Domain1D",
    "EigenConstants",
    "EvalResult",
    "ExponentFit",
    "FracParams",
    "GradedGrid",
    "HalfSpaceSetup",
    "QuadratureError",
    "QuadratureSpec",
    "RegionSet",
    "ScalarField",
    "SolveResult",
    "TailModel",
    "aitken_limit",
    "barrier_lower_bound_check",
    "c_nu",
    "c_nu_n",
    "combine_fields",
    "combined_barrier_field",
    "comparison_check",
    "constant_field",
    "cutoff_field",
    "cutoff_gradient_bound",
    "delta_scaling_scan",
    "dilate_field",
    "discretize",
    "eval_profile_nd",
    "eval_pv",
    "eval_symmetrized",
    "fit_boundary_exponent",
    "flattened_test_field",
    "g_field",
    "g_supersolution_check",
    "gaussian_mixture_field",
    "halfspace_power_field",
    "interpolant_field",
    "left_tail_term",
    "linear_reference_solve",
    "make_graded_grid",
    "monotone_test_field",
    "normal_derivative",
    "phi",
    "phi_field",
    "random_smooth_field",
    "reflect",
    "reflected_field",
    "rescale_supersolution",
    "scale_field",
    "scaled_limit_scan",
    "signed_power",
    "solve",
    "split_I_II",
    "translate_field",
    "verify_halfspace_eigen",
    "w_lambda",
]
