"""Exact conditional goodness-of-fit tests for main-effect models of
2^(p-1) regular fractional factorial designs with Poisson counts."""

from .basis import (
    DegreeTwoFiber,
    MarkovBasis,
    essential_fiber_census,
    essential_fibers,
    full_square_free_basis,
    minimal_basis_size,
    minimal_markov_basis,
    violates_sign_lemma,
)
from .design import (
    CountTable,
    Design,
    ModelMatrix,
    Move,
    SufficientStat,
    build_design,
    build_model_matrix,
    is_move,
    move_from_dense,
    sufficient_stat,
)
from .errors import (
    BoundaryMLEError,
    ConfigurationError,
    EnumerationInfeasibleError,
    FFExactError,
    InvalidParameterError,
    SizeLimitError,
    TruncatedFiberError,
    UndefinedModelError,
)
from .fiber import (
    ConnectivityReport,
    Fiber,
    check_connectivity,
    enumerate_fiber,
    exact_p_value,
)
from .glm import (
    FitResult,
    GofStatistics,
    chi_square_upper_tail,
    fit_main_effect,
    g2_statistic,
)
from .sampler import (
    KERNEL_BACKEND,
    ChainConfig,
    ChainResult,
    GSquaredStatistic,
    ProbabilityOrderingStatistic,
    TestReport,
    estimate_p,
    run_chain,
)

__version__ = "0.1.0"
