"""Phase-transition analysis of majority-vote ensembles.

The estimated benefit of majority voting over a single ensemble member
jumps discontinuously as the member rates cross 1/2; this package
provides the closed-form analysis, exact finite-n oracles, seeded Monte
Carlo, grid sweeps over the (p, q) square, and diagnosis of real
prediction matrices.
"""

from .analytic import (
    Phase,
    PhaseVerdict,
    Side,
    asymptotic_sigma_sq,
    delta,
    delta_asymptotic,
    estimated_error,
    estimated_error_asymptotic,
    geometric_variance_factor,
    limiting_delta,
    limiting_error,
    mean_individual_error,
    phase_of,
    side_of,
    std_normal_cdf,
    sum_variance,
    uses_abusive_variance,
    SigmaSq,
)
from .diagnose import (
    DiagnosisReport,
    NonBinaryEntry,
    PredictionMatrix,
    SingleClassData,
    diagnose,
    format_report,
    read_prediction_csv,
)
from .grid import GridRow, Improvement, max_improvement, sweep
from .model import (
    ASYMPTOTIC,
    BadParameter,
    BadSize,
    BetaSpec,
    CorrelationModel,
    EnsembleConfig,
    Equicorrelated,
    Geometric,
    GridSpec,
    Independent,
    Prior,
    RateOutOfRange,
    RatePair,
    VotePhaseError,
    validate_config,
)
from .montecarlo import (
    CHUNK_REPS,
    CorrelationSummary,
    DegenerateVariance,
    McEstimate,
    mc_conditional_error,
    mc_correlation_matrix,
    mc_error,
)
from .oracle import (
    BRUTE_FORCE_SIZE_GUARD,
    GEOMETRIC_SIZE_GUARD,
    SizeGuardExceeded,
    VotePmf,
    binomial_pmf,
    brute_force_error,
    exact_error,
    exact_vote_pmf,
)
from .sampler import (
    RngSeed,
    VoteVector,
    majority_vote,
    make_rng,
    markov_transition_probs,
    sample_labeled_votes,
    sample_matrix,
    sample_votes,
    sample_votes_heterogeneous,
)

__version__ = "0.1.0"

__all__ = [
    "ASYMPTOTIC",
    "BRUTE_FORCE_SIZE_GUARD",
    "BadParameter",
    "BadSize",
    "BetaSpec",
    "CHUNK_REPS",
    "CorrelationModel",
    "CorrelationSummary",
    "DegenerateVariance",
    "DiagnosisReport",
    "EnsembleConfig",
    "Equicorrelated",
    "GEOMETRIC_SIZE_GUARD",
    "Geometric",
    "GridRow",
    "GridSpec",
    "Improvement",
    "Independent",
    "McEstimate",
    "NonBinaryEntry",
    "Phase",
    "PhaseVerdict",
    "PredictionMatrix",
    "Prior",
    "RateOutOfRange",
    "RatePair",
    "RngSeed",
    "Side",
    "SigmaSq",
    "SingleClassData",
    "SizeGuardExceeded",
    "VotePhaseError",
    "VotePmf",
    "VoteVector",
    "asymptotic_sigma_sq",
    "binomial_pmf",
    "brute_force_error",
    "delta",
    "delta_asymptotic",
    "diagnose",
    "estimated_error",
    "estimated_error_asymptotic",
    "exact_error",
    "exact_vote_pmf",
    "format_report",
    "geometric_variance_factor",
    "limiting_delta",
    "limiting_error",
    "majority_vote",
    "make_rng",
    "markov_transition_probs",
    "max_improvement",
    "mc_conditional_error",
    "mc_correlation_matrix",
    "mc_error",
    "mean_individual_error",
    "phase_of",
    "read_prediction_csv",
    "sample_labeled_votes",
    "sample_matrix",
    "sample_votes",
    "sample_votes_heterogeneous",
    "side_of",
    "std_normal_cdf",
    "sum_variance",
    "sweep",
    "uses_abusive_variance",
    "validate_config",
]
