"""Smoothed weighted empirical likelihood confidence intervals for quantiles
of censored lifetimes."""
from .baselines import PercentileCI, bootstrap_percentile_ci
from .calibration import (
    CUBE_ROOT_N,
    ROOT_N,
    CalibrationResult,
    RateSpec,
    calibrate,
    calibrate_m_of_n,
    calibrate_n_of_n,
    convergence_rate,
    select_order,
    threshold_from_rho,
)
from .censoring import (
    CensoredSample,
    CensoringInterval,
    GeneratorParams,
    Lifetime,
    SampleError,
    Scheme,
    generate,
    make_sample,
    parse_sample,
    preset,
    to_intervals,
)
from .intervals import ConfidenceInterval, DegenerateError, brute_force_bounds, feasible_range, welrci
from .npmle import (
    ConvergenceError,
    DiscreteDistribution,
    EmReport,
    fit_npmle,
    kaplan_meier,
    pava_current_status,
    turnbull_em,
)
from .simulation import StudyConfig, StudyReport, load_config, run_study, run_trial
from .smoothing import MomentSet, h_weight, moments, smoothed_cdf, smoothed_quantile
from .welr import (
    ExpansionCoefficients,
    WelrEvaluation,
    expansion_coefficients,
    expansion_statistic,
    neg2_log_welr,
    solve_lambda,
)

__version__ = "0.1.0"
