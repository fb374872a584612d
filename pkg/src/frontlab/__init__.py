"""Numerical laboratory for a mass-conserving free boundary reaction-diffusion front."""

from .asymptotics import (
    INFINITE_MASS_CONSTANT,
    LOG_COEFF_PULLED,
    LOG_COEFF_TRANSITION,
    AsymptoticPrediction,
    b_of_t,
    fit_front,
    heavy_tail_prediction,
    m_pulled,
    m_slow_decay,
    slow_decay_constant,
)
from .beta_problem import (
    BetaConfig,
    BetaSolveResult,
    I_beta,
    front_prediction_beta,
    map_U_to_V,
    map_V0_to_U0,
    map_V_to_U,
    pushed_centring,
    pushed_constant,
    solve_beta,
    transition_constant,
)
from .brunet_derrida import BDReport, bd_lhs, bd_report, bd_rhs, r0_of, speed_from_r0
from .errors import (
    DomainError,
    InstabilityError,
    ParameterError,
    PrecisionError,
    WindowError,
)
from .initial_conditions import (
    BetaWave,
    ExpMixture,
    Heaviside,
    InitialCondition,
    PowerExpTail,
    Tabulated,
    Wave,
    exp_tail,
    finite_initial_mass,
    parse_ic,
)
from .solver import (
    FrontTrace,
    Grid,
    Profile,
    SolveResult,
    boundary_slope_diagnostics,
    extract_front,
    feynman_kac_check,
    solve_obstacle,
    solve_penalized,
)
from .stochastic import (
    Ensemble,
    SurvivalCurve,
    killed_bm_conditional_ccdf,
    killed_bm_survival,
    nbbm_run,
    nbbm_stationary_ccdf,
)
from .waves import (
    SQRT2,
    Pi_beta_c,
    Pi_beta_min,
    Pi_c,
    Pi_min,
    Pi_min_inverse,
    WaveParams,
    c_beta_min,
    is_nonnegative_wave,
    pi_c,
    pi_min,
)

__version__ = "0.1.0"
