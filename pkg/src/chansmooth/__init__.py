"""Poisson versus Gaussian smoothing of compactly supported priors.

Divergences between ``Poi_gamma o pi`` and ``Gsn_sigma o pi`` mixtures,
explicit evaluators for the bounds linking the two channels, and an NPMLE
rate-study harness.
"""

from .bounds import (
    BoundReport,
    char_envelope,
    corollary_u_factor,
    e_max,
    e_max_forms,
    laplace_envelope,
    lemma_l2tv_bound,
    lemma_tv_w1_bound,
    solve_r_epsilon,
    solve_r_ell,
    t_factor,
    theorem1_bound,
    theorem2_bound,
    theorem2_log_bound,
)
from .divergences import (
    DivergenceResult,
    Method,
    hellinger_sq_poisson,
    l2_gaussian,
    tv_gaussian,
    tv_poisson,
    w1,
    w1_smoothed,
)
from .estimation import (
    Metric,
    NpmleConfig,
    NpmleFit,
    RateStudyRecord,
    fit_rate_slope,
    npmle_fit,
    npmle_solve,
    polylog_sigma_schedule,
    rate_study,
    summarize,
)
from .exceptions import (
    ChanSmoothError,
    ConfigError,
    InadmissibleEpsilon,
    InsufficientGrid,
    LikelihoodDegenerate,
    RemainderNotCertifiable,
    TruncationCapExceeded,
)
from .experiments import DominanceRow, dominance_sweep, family_constants
from .measures import (
    ChannelParams,
    GaussianMixture,
    Prior,
    derive_seed,
    format_prior,
    parse_prior,
    poisson_pmf,
    prior_tv,
    random_pair,
    random_prior,
    sample_poisson_mixture,
)
from .transforms import annulus_max, char_fn, laplace, z_transform_poisson

__version__ = "0.1.0"
