"""Truncated normal sampling toolkit.

Optimal accept-reject samplers for one- and two-sided truncated normal
distributions, an automatic method dispatcher, and a Gibbs sampler for
multivariate normals restricted to convex regions, plus the analytic
oracles and empirical diagnostics used to validate them.
"""

from .diagnostics import (
    AcceptanceStats,
    KsReport,
    MultiChainSpread,
    collect_acceptance,
    kolmogorov_pvalue,
    ks_test,
    multi_chain_spread,
    truncated_cdf,
    truncated_moments,
)
from .errors import (
    DegenerateIntervalError,
    ExtremeTruncationError,
    IllConditionedError,
    InconsistentStateError,
    NotPositiveDefiniteError,
    SamplingCapError,
    TruncsimError,
)
from .manifest import VERSION, RunManifest
from .mvn import (
    Ball,
    Box,
    ChainConfig,
    ChainOutput,
    ConditionalMoments,
    ConvexRegion,
    MvnSpec,
    OrderCone,
    RejectionDraw,
    conditional_moments,
    ergodic_average,
    gibbs_sweep,
    invert_spd,
    mvn_rejection,
    run_chain,
    running_average,
    submatrix_inverse,
)
from .numerics import (
    RandomStream,
    derive_seed,
    draw_shifted_exponential,
    draw_standard_normal,
    normal_cdf,
    normal_interval_prob,
    normal_pdf,
    normal_quantile,
    normal_sf,
)
from .univariate import (
    DEFAULT_MAX_PROPOSALS,
    DrawResult,
    ExponentialProposal,
    SamplerMethod,
    StandardizedBounds,
    UnivariateTruncationSpec,
    acceptance_one_sided,
    acceptance_two_sided,
    alpha_star,
    choose_one_sided_method,
    choose_two_sided_method,
    draw_one_sided,
    draw_right_truncated,
    draw_truncated,
    draw_two_sided,
    eq21_bound,
    exponential_proposal,
    sample_truncated,
    standardize,
)

__version__ = VERSION
