"""Expander random-walk sampling and exact checks of its concentration bounds."""

from .bounds import (
    BoundParams,
    BoundReport,
    MonomialIndex,
    increasing_tuple_bound,
    mgf_bound_thm1,
    mgf_series_truncated,
    moment_bound,
    monomial_bound,
    negative_binomial_partial_sum,
    optimal_alpha,
    stirling2,
    stirling_partial_sum,
    tail_bound_cor2,
)
from .errors import (
    DomainError,
    ExpsampError,
    FormatError,
    InvalidParameterError,
    InvalidSizeError,
    ShapeError,
    SizeLimitError,
    SpectralDegenerateError,
)
from .montecarlo import EstimateReport, estimate_mgf, estimate_tail
from .oracle import (
    SnDistribution,
    brute_force_distribution,
    exact_mgf,
    exact_monomial_expectation,
    increasing_tuple_exact_sum,
    transfer_distribution,
    two_state_exact_monomial,
    two_state_limit_mgf,
)
from .walk import (
    MarkingFunctions,
    WalkOperator,
    WalkSample,
    compute_lambda,
    make_complete_with_loops,
    make_interpolation,
    make_random_regular,
    make_two_state_chain,
    marks_for,
    sample_walk,
    seed_length_bits,
)

__version__ = "0.1.0"
