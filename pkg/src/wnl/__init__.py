"""Weighted norms of polynomials on complex l_p^n.

Numerical s-norms, sup-norms and weighted norms sup (1 - ||x||^2)|P(x)|,
the constants that relate them, explicit non-attaining polynomials, and a
constructive correction that turns a near-attaining pair into an attaining one.
"""

from .bollobas import (
    BollobasTrace,
    Schedule,
    bollobas_correct,
    cauchy_monitor,
    localization_check,
    normalize_v,
)
from .constants import M_N, constants_table, delta_N, eta, mu, s_alpha_N, s_of_N
from .counterexamples import (
    TruncationDiagnostic,
    exact_sup_Pr,
    make_fN,
    make_Pr,
    make_Q,
    phase_sup_Pr,
    verify_fN,
    verify_Pr,
    verify_Q,
)
from .errors import *  # noqa: F401,F403
from .norms import NormResult, OptimizerConfig, attainment_witness, s_norm, sup_norm, v_norm
from .polynomial import (
    Polynomial,
    RankOneUpdateOperator,
    component_eval,
    diagonal,
    eval_poly,
    functional_power,
    make_projection,
    make_T,
    precompose,
    random_diagonal,
)
from .space import (
    STANDARD_WEIGHT,
    Functional,
    LpSpace,
    LpVector,
    Weight,
    dist_to_span,
    duality_functional,
    lp_norm,
    modulus_of_convexity,
    weight_eval,
)

__version__ = "0.1.0"
