"""Zero-sum Markov game strategies for honey-patch deception engagements.

Model attacker-defender engagements over honey-patched vulnerabilities
as finite zero-sum Markov games, compute the defender's optimal mixed
strategy (plus pure min-max and uniform-random baselines) with an
estimator-style API, and stress the result against behavioral attacker
models in seeded Monte Carlo rollouts.
"""

from .games import (
    NO_MITIGATION,
    NO_OP,
    ActionSet,
    GameError,
    GameState,
    MarkovGame,
    TransitionModel,
    UnknownActionError,
    UnknownStateError,
    Violation,
    validate_game,
)
from .ingest import (
    DerivedParams,
    Discrepancy,
    ExperimentRecord,
    RecordError,
    compare_with_published,
    derive_transition_probabilities,
    parse_experiment_records,
    serialize_experiment_records,
    study_summary_text,
)
from .scenario import (
    PRESET_NAMES,
    ExploitOutcomes,
    ScenarioConfig,
    ScenarioError,
    VulnerabilityProfile,
    apply_cost_variant,
    build_engagement_game,
    build_utility_matrix,
    expert_transition_model,
    load_preset,
    parse_scenario_file,
    random_transition_model,
    serialize_scenario,
    tuned_transition_model,
)
from .simulate import (
    AttackerKind,
    AttackerModel,
    EpisodeTrace,
    HypothesisReport,
    PayoffStats,
    TraceStep,
    export_traces,
    hypothesis_report,
    simulate_episodes,
)
from .solvers import (
    ConvergenceError,
    FixedPolicySolver,
    MarkovGameSolver,
    MaximinSolver,
    MinMaxPureSolver,
    UniformRandomSolver,
    check_policy,
    q_values,
)
from .zerosum import best_response_value, solve_matrix_game

__version__ = "0.1.0"

__all__ = [
    "ActionSet",
    "AttackerKind",
    "AttackerModel",
    "ConvergenceError",
    "DerivedParams",
    "Discrepancy",
    "EpisodeTrace",
    "ExperimentRecord",
    "ExploitOutcomes",
    "FixedPolicySolver",
    "GameError",
    "GameState",
    "HypothesisReport",
    "MarkovGame",
    "MarkovGameSolver",
    "MaximinSolver",
    "MinMaxPureSolver",
    "NO_MITIGATION",
    "NO_OP",
    "PayoffStats",
    "PRESET_NAMES",
    "RecordError",
    "ScenarioConfig",
    "ScenarioError",
    "TraceStep",
    "TransitionModel",
    "UniformRandomSolver",
    "UnknownActionError",
    "UnknownStateError",
    "Violation",
    "VulnerabilityProfile",
    "apply_cost_variant",
    "best_response_value",
    "build_engagement_game",
    "build_utility_matrix",
    "check_policy",
    "compare_with_published",
    "derive_transition_probabilities",
    "expert_transition_model",
    "export_traces",
    "hypothesis_report",
    "load_preset",
    "parse_experiment_records",
    "parse_scenario_file",
    "q_values",
    "random_transition_model",
    "serialize_experiment_records",
    "serialize_scenario",
    "simulate_episodes",
    "solve_matrix_game",
    "study_summary_text",
    "tuned_transition_model",
    "validate_game",
]
