"""Approximate maximum-weight bipartite matching from ordinal information."""

from .algorithms import (
    chain_walk,
    greedy_total_order_k,
    greedy_undominated_k,
    random_matching,
    rsd,
    rsd_partial,
    run_batch,
    total_order_mixed,
    two_sided,
    two_sided_low_alpha,
    two_sided_mixed,
)
from .core import (
    BudgetViolation,
    Instance,
    InstanceError,
    Matching,
    MatchingError,
    check_metric,
    derive_prefs,
    derive_total_order,
    load_instance,
    matching_weight,
)
from .generators import GenSpec
from .harness import lemma_property_suite, run_trials, theoretical_bound, tradeoff_curve
from .oracles import brute_force_opt, exact_random_expectation, exact_rsd_expectation, opt_matching
from .rng import Rng

__all__ = [
    "BudgetViolation", "GenSpec", "Instance", "InstanceError", "Matching", "MatchingError", "Rng",
    "brute_force_opt", "chain_walk", "check_metric", "derive_prefs", "derive_total_order",
    "exact_random_expectation", "exact_rsd_expectation", "greedy_total_order_k", "greedy_undominated_k",
    "lemma_property_suite", "load_instance", "matching_weight", "opt_matching", "random_matching", "rsd",
    "rsd_partial", "run_batch", "run_trials", "theoretical_bound", "total_order_mixed", "tradeoff_curve",
    "two_sided", "two_sided_low_alpha", "two_sided_mixed",
]
