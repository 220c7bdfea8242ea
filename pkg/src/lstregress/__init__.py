"""Robust linear regression by least squares of depth-trimmed residuals.

Residuals are trimmed first -- by their outlyingness relative to the
residual median in MAD units -- and the squares of the survivors are
minimized.  The package provides two randomized approximate solvers, a
small-instance brute-force oracle, LS and FAST-LTS baselines, robustness
diagnostics and a reproducible Monte-Carlo benchmark harness.
"""

from ._kernels import BACKEND as KERNEL_BACKEND
from .bench import (
    BenchTable,
    Scenario,
    contaminate,
    emse,
    empirical_variance_mode,
    gen_clean_gaussian,
    gen_correlated,
    run_benchmark,
)
from .core import (
    Dataset,
    DegenerateDesignError,
    NoValidPairsError,
    ObjectiveValue,
    RankDeficientError,
    SingularMatrixError,
    TooManySingularDrawsError,
    TrimState,
    UnsupportedDimensionError,
    compute_residuals,
    design_rank_ok,
    mad,
    median,
    objective_q,
    region_signature,
    trim_state,
)
from .diagnostics import (
    AsymptoticConstants,
    ContaminationPoint,
    affine_carriers,
    asymptotic_variance,
    breakdown_probe,
    empirical_if,
    fit_by_tag,
    influence_function,
    rbp,
    scale_response,
    shift_response,
)
from .estimators import (
    Aa1Config,
    Aa2Config,
    FitReport,
    LtsConfig,
    ls_fit,
    ls_report,
    lst_fit_aa1,
    lst_fit_aa2,
    lst_oracle,
    lts_fit,
    verify_fixed_point,
)

__version__ = "0.1.0"
