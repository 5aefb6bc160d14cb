"""Projection regression depth: robust deepest-fit regression and its
robustness laboratory (breakdown, maximum bias, influence, efficiency)."""

from .depthcore import (
    Dataset,
    DepthReport,
    InnerEstimator,
    mad,
    median,
    pd_n,
    prd,
    pwm,
    uf,
    uf_v,
)
from .estimators import (
    FitConfig,
    FitResult,
    Objective,
    default_fit_config,
    fit_ls,
    fit_prd,
    fit_rd_simple,
    generate_candidates,
    generate_directions,
    rdepth_simple,
)
from .oracle import (
    ContaminationSpec,
    DistSpec,
    IFResult,
    OracleBounds,
    abp_values,
    cauchy,
    contaminated_mad,
    contaminated_median,
    influence_function,
    mb_bounds,
    normal,
    q_eps,
    ratio_distribution,
    rbp_formula,
    student_t,
)
from .roblab import (
    EmpiricalIF,
    EmpiricalMB,
    RbpResult,
    demo_contamination,
    empirical_if,
    empirical_mb,
    leverage_grid,
    rbp_experiment,
)
from .simharness import (
    EfficiencyReport,
    SimConfig,
    efficiency_orderings,
    generate_sample,
    relative_efficiency,
)

__version__ = "0.1.0"

__all__ = [
    "Dataset", "DepthReport", "InnerEstimator",
    "median", "mad", "pd_n", "pwm", "uf_v", "uf", "prd",
    "Objective", "FitConfig", "FitResult",
    "generate_candidates", "generate_directions",
    "fit_prd", "fit_ls", "rdepth_simple", "fit_rd_simple",
    "default_fit_config",
    "DistSpec", "ContaminationSpec", "OracleBounds", "IFResult",
    "normal", "student_t", "cauchy", "ratio_distribution",
    "q_eps", "contaminated_median", "contaminated_mad", "mb_bounds",
    "influence_function", "rbp_formula", "abp_values",
    "RbpResult", "EmpiricalMB", "EmpiricalIF",
    "rbp_experiment", "empirical_mb", "empirical_if", "leverage_grid",
    "demo_contamination",
    "SimConfig", "EfficiencyReport",
    "generate_sample", "relative_efficiency", "efficiency_orderings",
    "__version__",
]
