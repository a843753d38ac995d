"""Online resource allocation under threshold activation.

A simulation library for the setting where a fixed budget is divided among
arms each round, an arm pays off only if its share reaches a hidden
threshold, and the learner sees censored per-arm rewards. Ships two
learners (shared threshold, per-arm thresholds), known-threshold and random
baselines, an exact packing oracle, and a seeded experiment harness with a
CSV interface.
"""

__version__ = "0.1.0"

from .baselines import RandomPackingPolicy, known_shared_threshold, known_threshold_vector
from .domain import (
    ALGORITHMS,
    AggregateTrace,
    Allocation,
    BetaPosterior,
    ExperimentConfig,
    ProblemInstance,
    RegretTrace,
    RoundFeedback,
    VALUE_TOL,
    feasibility_slack,
    validate_instance,
)
from .environment import (
    Environment,
    binarize,
    mean_reward_of_allocation,
    rng_stream,
)
from .harness import (
    RunFailure,
    builtin_instance,
    default_repeats,
    fit_log_growth,
    horizon_scaled_delta,
    make_policy,
    run_experiment,
    run_single,
    sweep_configs,
    warn_if_degenerate,
    write_outputs,
)
from .oracle import (
    EquivalentSameThreshold,
    KnapsackSolution,
    allocation_equivalent_same,
    kl_bernoulli,
    lower_bound_constant,
    max_gap,
    max_packable_arms,
    min_optimal_arm_count,
    solve_knapsack,
    suboptimality_gap,
    verify_allocation_equivalent,
    zero_streak_limit_per_arm,
    zero_streak_limit_shared,
)
from .per_arm import PerArmThresholdPolicy, ResourceEvents, ThresholdSearch
from .same_threshold import SameThresholdPolicy, SearchState

__all__ = [
    "ALGORITHMS",
    "AggregateTrace",
    "Allocation",
    "BetaPosterior",
    "Environment",
    "EquivalentSameThreshold",
    "ExperimentConfig",
    "KnapsackSolution",
    "PerArmThresholdPolicy",
    "ProblemInstance",
    "RandomPackingPolicy",
    "RegretTrace",
    "ResourceEvents",
    "RoundFeedback",
    "RunFailure",
    "SameThresholdPolicy",
    "SearchState",
    "ThresholdSearch",
    "VALUE_TOL",
    "allocation_equivalent_same",
    "binarize",
    "builtin_instance",
    "default_repeats",
    "feasibility_slack",
    "fit_log_growth",
    "horizon_scaled_delta",
    "kl_bernoulli",
    "known_shared_threshold",
    "known_threshold_vector",
    "lower_bound_constant",
    "make_policy",
    "max_gap",
    "max_packable_arms",
    "mean_reward_of_allocation",
    "min_optimal_arm_count",
    "rng_stream",
    "run_experiment",
    "run_single",
    "solve_knapsack",
    "suboptimality_gap",
    "sweep_configs",
    "validate_instance",
    "verify_allocation_equivalent",
    "warn_if_degenerate",
    "write_outputs",
    "zero_streak_limit_per_arm",
    "zero_streak_limit_shared",
]
