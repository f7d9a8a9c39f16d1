"""Belief-constrained dialogue acts over partition models, with three
benchmark dialogue games and a seeded experiment harness.
"""

from .beliefs import (
    BeliefVector,
    DialogueContext,
    Estimator,
    EstimatorClientConfig,
    EvalMode,
    Event,
    GroundTruthTranscript,
    KeywordEstimator,
    LabeledExample,
    OracleEstimator,
    Perspective,
    RandomEstimator,
    RemoteEstimator,
    WorldSet,
    belief_gap,
    context_from_text,
    emit_training_data,
    evaluate_estimator,
    keyword_estimate,
    oracle_estimate,
    pairwise_accuracy,
    random_estimate,
    read_training_file,
    remote_estimate,
    write_training_file,
)
from .epistemic import (
    ActKind,
    PartitionModel,
    TwoAgentModel,
    act_feasible,
    cell_of,
    feasible_events_bruteforce,
    knowledge_operator,
    knows_at,
    negate,
    probability,
)
from .errors import (
    BedaError,
    CapacityError,
    DataError,
    DomainError,
    ProtocolError,
    TemplateError,
    TransportError,
)
from .generation import (
    ActionKind,
    GeneratorConfig,
    ParsedAction,
    Prompt,
    RemoteGenerator,
    ScriptedGenerator,
    SequenceGenerator,
    Utterance,
    fill_template,
    minddial_condition,
    parse_action,
    render_deal,
    render_prompt,
    token_count,
    wrap_cot,
    wrap_self_reflect,
)
from .harness import (
    EpisodeRecord,
    ExperimentConfig,
    MetricsReport,
    compute_metrics,
    episode_seed,
    load_records,
    persist_records,
    replay_episode,
    run_experiment,
)
from .selection import (
    ALL,
    UNIFORM_ONE,
    ActConstraint,
    MixedSelection,
    SelectionPolicy,
    SelectionResult,
    choose,
    compose_condition,
    feasible_set,
    mixed_select,
    uniform_k,
)
from . import games

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
