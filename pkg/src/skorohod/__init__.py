"""Skorohod integrals of finite-chaos integrands.

Evaluate integrands of the form f(s, W_s, W_{tau_2}, ..., W_{tau_K}) given by
finite Wick-monomial chaos expansions, compute the realized integral and its
optimal approximation from discrete path observations in closed form, and
verify the first-order convergence of the approximation error together with
its limit constant.
"""

from .chaos import (
    CallableCoefficient,
    ChaosExpansion,
    ChaosTerm,
    Coefficient,
    ExpPolyCoefficient,
    PiecewisePoly,
    PolyCoefficient,
    StepFunction,
    apply_L,
    apply_dx,
    coefficients_constant,
    constant_coefficient,
    cross_moment,
    expansion_value,
    expansions_allclose,
    ito_decompose,
    s_transform,
    s_transform_identity_rhs,
    s_transform_of_integral,
    second_moment,
)
from .errors import CapacityError, ConsistencyError, ProblemParseError, UnsupportedError
from .experiment import (
    ErrorReport,
    ErrorRow,
    RateStudyConfig,
    analytic_fn2,
    constant_C,
    drift_l2_integral,
    fit_slope,
    mc_error,
    nested_mc_oracle,
    nested_mc_study,
    path_rng,
    rate_study,
    sample_path,
)
from .gaussian import (
    GaussianVector,
    build_gaussian_vector,
    bridge_double_integral,
    cov_bridge_bridge,
    cov_bridge_lin,
    cov_bridge_w,
    cov_brownian,
    cov_lin,
    interp_kernel,
)
from .integrator import (
    BrownianPath,
    EvaluationPlan,
    batch_conditional,
    batch_skorohod,
    batch_time_integral,
    conditional_pathwise,
    error_sample,
    fine_grid,
    grid_work,
    pathwise_time_integral,
    skorohod_pathwise,
)
from .problems import (
    BUILTIN_NAMES,
    builtin_expansion,
    linear_drift,
    load_expansion,
    parse_expansion,
    serialize_expansion,
    sine,
    sine_truncation_tail,
    square,
    tau_linear,
    wick_square_terminal,
)
from .wick import (
    WickValueContext,
    hermite,
    wick_exp,
    wick_inner,
    wick_monomial_value,
    wick_upper_bound,
)

__version__ = "0.1.0"
