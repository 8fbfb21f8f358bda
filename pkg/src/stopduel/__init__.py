"""Nash equilibria of a two-player stopping duel with uncertain competition.

Closed-form GBM real-option example plus a generic tabulated solver, the
randomized equilibrium stopping rules, belief filtering along paths, a
deterministic Monte Carlo engine, and a verification harness that turns the
equilibrium claims into pass/fail reports.
"""

from .belief import BeliefPath, build_belief_path, gamma_from_pi, pi_from_gamma
from .engine import (EstimateResult, OutcomeRecord, SimConfig, estimate_value,
                     integrate_over_levels, payoff_vs_rule, sample_outcome,
                     sample_outcomes)
from .equilibrium import (EquilibriumProfile, NoEquilibriumError,
                          RandomizedStopRule, belief_evolution, build_profile,
                          initial_jump, jump_structure)
from .model import (GbmRealOptionModel, eta, hitting_discount,
                    one_player_threshold, payoff_g, value_gbm)
from .regions import (BeliefPoint, RegionLabel, b_inverse, boundary_b,
                      boundary_c, classify, safety_level)
from .stopping import (ConvergenceError, DiffusionSpec, GridSpec, ValueOracle,
                       gbm_spec, solve_value_chain, stop_region)
from .verify import (EvalReport, best_response_sweep, indifference_check,
                     identity_suite, run_suite, safety_dominance)

__version__ = "0.1.0"

__all__ = [
    "BeliefPath", "BeliefPoint", "ConvergenceError", "DiffusionSpec",
    "EquilibriumProfile", "EstimateResult", "EvalReport", "GbmRealOptionModel",
    "GridSpec", "NoEquilibriumError", "OutcomeRecord", "RandomizedStopRule",
    "RegionLabel", "SimConfig", "ValueOracle", "b_inverse",
    "belief_evolution", "best_response_sweep", "boundary_b", "boundary_c",
    "build_belief_path", "build_profile", "classify", "estimate_value",
    "eta", "gamma_from_pi", "gbm_spec", "hitting_discount",
    "identity_suite", "indifference_check", "initial_jump",
    "integrate_over_levels", "jump_structure", "one_player_threshold",
    "payoff_g", "payoff_vs_rule", "pi_from_gamma", "run_suite",
    "safety_dominance", "safety_level", "sample_outcome", "sample_outcomes",
    "solve_value_chain", "stop_region", "value_gbm",
]
