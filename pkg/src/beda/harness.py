"""Experiment orchestration: seeded episode batches, method wiring,
metrics with format-error exclusion, and JSONL persistence.

Per-episode seeds are a stable 64-bit hash of (global seed, repetition,
episode index), so execution order and parallelism cannot change results.
"""

from __future__ import annotations

import hashlib
import json
import random
from dataclasses import asdict, dataclass, field
from typing import Mapping, Sequence

from .beliefs import (
    EstimatorClientConfig,
    KeywordEstimator,
    OracleEstimator,
    Perspective,
    RandomEstimator,
    RemoteEstimator,
)
from .errors import DataError, DomainError, TransportError
from .generation import (
    Generator,
    GeneratorConfig,
    RemoteGenerator,
    ScriptedGenerator,
    wrap_cot,
    wrap_self_reflect,
)
from .games import (
    CasinoNegotiatorAgent,
    CkbgBurglarAgent,
    CkbgKeeperAgent,
    EpisodeOutcome,
    MfPlayerAgent,
    ScriptedAgent,
    casino_generate_scenarios,
    casino_run_episode,
    ckbg_generate_dataset,
    ckbg_run_episode,
    mf_generate_scenarios,
    mf_run_episode,
)
from .games.ckbg import burglar_known_events, keeper_true_events

METHODS = ("BEDA", "WO_BELIEF", "WO_BELIEF_COT", "WO_BELIEF_REFLECT", "RAND_BELIEF", "MINDDIAL")
GAMES = ("ckbg", "mf", "casino")


@dataclass(frozen=True)
class ExperimentConfig:
    game: str
    method: str = "BEDA"
    estimator: str = "oracle"  # oracle | keyword | random | remote
    generator: GeneratorConfig = field(default_factory=GeneratorConfig)
    epsilon: float = 0.5
    n_episodes: int = 10
    repetitions: int = 3
    seed: int = 0
    max_turns: int | None = None
    estimator_endpoint: str = ""
    output_path: str = ""

    def __post_init__(self):
        if self.game not in GAMES:
            raise DomainError(f"unknown game {self.game!r}")
        if self.method not in METHODS:
            raise DomainError(f"unknown method {self.method!r}")
        if self.repetitions < 1:
            raise DomainError("repetitions must be >= 1")
        if self.method.startswith("WO_BELIEF") and self.estimator == "remote":
            raise DomainError("w/o-belief methods use no estimator")

    def fingerprint(self) -> str:
        doc = asdict(self)
        doc.pop("output_path")  # where records land cannot change what they contain
        return hashlib.sha256(json.dumps(doc, sort_keys=True).encode()).hexdigest()[:16]

    def to_dict(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_dict(doc: Mapping) -> "ExperimentConfig":
        doc = dict(doc)
        gen = doc.get("generator", {})
        doc["generator"] = GeneratorConfig(**gen) if isinstance(gen, Mapping) else gen
        return ExperimentConfig(**doc)


def episode_seed(global_seed: int, repetition: int, index: int) -> int:
    material = f"{global_seed}:{repetition}:{index}".encode()
    return int.from_bytes(hashlib.sha256(material).digest()[:8], "big")


@dataclass
class EpisodeRecord:
    config_fingerprint: str
    game_id: str
    repetition: int
    index: int
    seed: int
    status: str  # ok | format_error | infra_failure
    outcome: EpisodeOutcome
    transcript: list[dict]

    def to_dict(self) -> dict:
        return {
            "config_fingerprint": self.config_fingerprint,
            "game_id": self.game_id,
            "repetition": self.repetition,
            "index": self.index,
            "seed": self.seed,
            "status": self.status,
            "outcome": self.outcome.to_dict(),
            "transcript": self.transcript,
        }

    @staticmethod
    def from_dict(doc: Mapping) -> "EpisodeRecord":
        return EpisodeRecord(
            config_fingerprint=doc["config_fingerprint"],
            game_id=doc["game_id"],
            repetition=doc["repetition"],
            index=doc["index"],
            seed=doc["seed"],
            status=doc["status"],
            outcome=EpisodeOutcome.from_dict(doc["outcome"]),
            transcript=list(doc["transcript"]),
        )


def persist_records(records: Sequence[EpisodeRecord], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), sort_keys=True, ensure_ascii=False) + "\n")


def load_records(path) -> list[EpisodeRecord]:
    records = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                records.append(EpisodeRecord.from_dict(json.loads(line)))
            except (ValueError, KeyError) as exc:
                raise DataError(f"{path}:{lineno}: malformed record: {exc}") from exc
    return records


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------


@dataclass
class MetricsReport:
    game_id: str
    per_repetition: list[dict]
    mean: dict
    format_error_count: int
    infra_failure_count: int
    n_valid: int
    undefined: bool
    token_convention: str = "both-sides total per episode"

    def to_dict(self) -> dict:
        return asdict(self)


def _metrics_for(records: Sequence[EpisodeRecord], game_id: str) -> dict:
    valid = [r for r in records if r.status == "ok"]
    if not valid:
        return {"undefined": True}
    n = len(valid)
    metrics: dict = {"n_valid": n, "undefined": False}
    turns = [r.outcome.turns for r in valid]
    tokens = [r.outcome.total_tokens() for r in valid]
    metrics["avg_turns"] = sum(turns) / n
    metrics["avg_tokens"] = sum(tokens) / n
    fallbacks = [r.outcome.fallback_count for r in valid]
    metrics["fallback_rate"] = sum(fallbacks) / n
    if game_id in ("ckbg", "mf"):
        successes = sum(1 for r in valid if r.outcome.success)
        sr = 100.0 * successes / n
        metrics["success_rate"] = sr
        metrics["sr_per_turn"] = sr / metrics["avg_turns"] if metrics["avg_turns"] else None
        metrics["sr_per_token"] = sr / metrics["avg_tokens"] if metrics["avg_tokens"] else None
    if game_id == "casino":
        agreeing = [r for r in valid if r.outcome.agreement]
        metrics["agreement_rate"] = len(agreeing) / n
        if agreeing:
            per_episode = [
                sum(r.outcome.rewards.values()) / len(r.outcome.rewards) for r in agreeing
            ]
            metrics["mean_agreement_reward"] = sum(per_episode) / len(per_episode)
        else:
            metrics["mean_agreement_reward"] = None
    return metrics


def compute_metrics(records: Sequence[EpisodeRecord], game_id: str | None = None) -> MetricsReport:
    """Aggregate over valid episodes only; format errors and infrastructure
    failures stay out of every numerator and denominator."""
    if not records:
        raise DomainError("no records")
    games = {r.game_id for r in records}
    if len(games) > 1:
        raise DomainError(f"records mix games: {sorted(games)}")
    game = game_id or next(iter(games))
    if game not in games:
        raise DomainError(f"records are for {next(iter(games))!r}, not {game!r}")

    reps = sorted({r.repetition for r in records})
    per_rep = [_metrics_for([r for r in records if r.repetition == rep], game) for rep in reps]
    defined = [m for m in per_rep if not m.get("undefined")]
    mean: dict = {}
    if defined:
        keys = [k for k in defined[0] if isinstance(defined[0][k], (int, float)) and k != "undefined"]
        for key in keys:
            values = [m[key] for m in defined if m.get(key) is not None]
            mean[key] = sum(values) / len(values) if values else None
    return MetricsReport(
        game_id=game,
        per_repetition=per_rep,
        mean=mean,
        format_error_count=sum(1 for r in records if r.status == "format_error"),
        infra_failure_count=sum(1 for r in records if r.status == "infra_failure"),
        n_valid=sum(1 for r in records if r.status == "ok"),
        undefined=not defined,
    )


# ---------------------------------------------------------------------------
# Agent wiring
# ---------------------------------------------------------------------------


def _wrap_generator(generator: Generator, method: str) -> Generator:
    if method == "WO_BELIEF_COT":
        return wrap_cot(generator)
    if method == "WO_BELIEF_REFLECT":
        return wrap_self_reflect(generator)
    return generator


def _condition_method(method: str) -> str:
    if method == "BEDA" or method == "RAND_BELIEF":
        return "beda"
    if method == "MINDDIAL":
        return "minddial"
    return "wo_belief"


def _make_estimators(config: ExperimentConfig, truth_self, truth_opp, seed: int):
    if config.method.startswith("WO_BELIEF"):
        return None, None
    if config.method == "RAND_BELIEF":
        est = RandomEstimator(seed)
        return est, est
    if config.estimator == "oracle":
        oracle = OracleEstimator(
            {Perspective.SELF_TRUTH: truth_self, Perspective.OPPONENT_KNOWS: truth_opp}
        )
        return oracle, oracle
    if config.estimator == "keyword":
        oracle = OracleEstimator({Perspective.SELF_TRUTH: truth_self})
        return oracle, KeywordEstimator()
    if config.estimator == "random":
        est = RandomEstimator(seed)
        return est, est
    if config.estimator == "remote":
        remote = RemoteEstimator(EstimatorClientConfig(config.estimator_endpoint))
        oracle = OracleEstimator({Perspective.SELF_TRUTH: truth_self})
        return oracle, remote
    raise DomainError(f"unknown estimator {config.estimator!r}")


# Scripted self-play policies: deterministic from the episode seed, with a
# small format-error rate to exercise the exclusion path.
_SCRIPT_FORMAT_ERROR_RATE = 0.05


def _scripted_ckbg(config: ExperimentConfig, setting, seed: int):
    rng = random.Random(seed)
    keeper_lines = {
        ("ckbg", "keeper", i): (
            f"Believe me, the {setting.valuable} is in the {setting.decoy_container}. "
            f"Stay away from the {setting.valuable_container}."
        )
        for i in range(8)
    }
    keeper_gen = _wrap_generator(ScriptedGenerator("ckbg", "keeper", keeper_lines), config.method)
    truth_self = keeper_true_events(setting)
    truth_opp = burglar_known_events(setting)
    self_est, opp_est = _make_estimators(config, truth_self, truth_opp, seed)
    keeper = CkbgKeeperAgent(
        setting,
        keeper_gen,
        self_estimator=self_est,
        opp_estimator=opp_est,
        epsilon=config.epsilon,
        method=_condition_method(config.method),
    )
    if rng.random() < _SCRIPT_FORMAT_ERROR_RATE:
        stop_line = "[STOP] I will just grab everything in the room."
    elif rng.random() < 0.7:
        stop_line = f"[STOP] Burglar chosed: {setting.decoy_container}."
    else:
        stop_line = f"[STOP] Burglar chosed: {setting.valuable_container}."
    c1, c2 = setting.containers
    burglar = ScriptedAgent(
        setting.burglar_name,
        [f"Where is the {setting.valuable}? The {c1} or the {c2}?", stop_line],
    )
    return keeper, burglar


def _scripted_mf(config: ExperimentConfig, scenario, seed: int):
    rng = random.Random(seed)
    mutual = scenario.mutual

    def index_of(friends):
        for i, friend in enumerate(friends):
            if scenario.friend_tuple(friend) == mutual:
                return i
        raise DataError("scenario lost its mutual friend")

    idx_a, idx_b = index_of(scenario.list_a), index_of(scenario.list_b)
    success = rng.random() < 0.6
    extra = rng.randrange(0, 3)
    confirm = f"{'CONFIRM:'} " + ", ".join(
        f"{a}: {v}" for a, v in zip(scenario.attributes, mutual)
    )
    filler = "One of my friends matches some of those attributes; tell me more."
    pick_b = idx_b if success else (idx_b + 1) % len(scenario.list_b)
    lines_a = [filler] * (1 + extra) + [confirm, f"Friend #{idx_a + 1}"]
    lines_b = [filler] * (1 + extra) + [confirm, f"Friend #{pick_b + 1}"]
    if rng.random() < _SCRIPT_FORMAT_ERROR_RATE:
        lines_b[-1] = "I cannot decide."
    return (
        ScriptedAgent(scenario.name_a, lines_a),
        ScriptedAgent(scenario.name_b, lines_b),
    )


def _scripted_casino(config: ExperimentConfig, scenario, seed: int):
    rng = random.Random(seed)
    offer = (2, 1, 0)
    counter = (1, 2, 3) if rng.random() < 0.75 else (2, 2, 3)
    lines_1 = [
        "Hi neighbor, let's split the supplies. "
        f"DEAL: food={offer[0]}, water={offer[1]}, firewood={offer[2]}",
    ]
    lines_2 = [
        "That could work for me. "
        f"DEAL: food={counter[0]}, water={counter[1]}, firewood={counter[2]}",
    ]
    return (
        ScriptedAgent(scenario.name_1, lines_1),
        ScriptedAgent(scenario.name_2, lines_2),
    )


def _live_agents(config: ExperimentConfig, game_obj, seed: int):
    generator = _wrap_generator(RemoteGenerator(config.generator), config.method)
    if config.game == "ckbg":
        setting = game_obj
        self_est, opp_est = _make_estimators(
            config, keeper_true_events(setting), burglar_known_events(setting), seed
        )
        keeper = CkbgKeeperAgent(
            setting, generator, self_est, opp_est, config.epsilon, method=_condition_method(config.method)
        )
        burglar = CkbgBurglarAgent(setting, RemoteGenerator(config.generator))
        return keeper, burglar
    if config.game == "mf":
        scenario = game_obj
        agents = []
        for name in (scenario.name_a, scenario.name_b):
            self_est, opp_est = _make_estimators(config, frozenset(), frozenset(), seed)
            if config.method == "BEDA" and config.estimator in ("keyword", "oracle"):
                self_est = opp_est = KeywordEstimator()
            agents.append(
                MfPlayerAgent(scenario, name, generator, self_est, opp_est, config.epsilon,
                              method=_condition_method(config.method))
            )
        return tuple(agents)
    scenario = game_obj
    agents = []
    for name in (scenario.name_1, scenario.name_2):
        ws_truth = _casino_truth(scenario, name)
        self_est, opp_est = _make_estimators(config, ws_truth, ws_truth, seed)
        agents.append(
            CasinoNegotiatorAgent(scenario, name, generator, self_est, opp_est, config.epsilon,
                                  method=_condition_method(config.method))
        )
    return tuple(agents)


def _casino_truth(scenario, name: str) -> frozenset[int]:
    from .games.casino import PREFERENCE_PERMUTATIONS, casino_world_set

    world_set = casino_world_set(scenario.name_1, scenario.name_2)
    true_ids = set()
    for event in world_set.events:
        negotiator = event.payload["negotiator"]
        perm = tuple(event.payload["permutation"].split(">"))
        holds = perm == scenario.preference_of(negotiator)
        if event.payload["polarity"] == "isn't":
            holds = not holds
        if holds:
            true_ids.add(event.id)
    return frozenset(true_ids)


def _game_objects(config: ExperimentConfig):
    if config.game == "ckbg":
        settings, _ = ckbg_generate_dataset(config.n_episodes, 3, seed=config.seed)
        return settings
    if config.game == "mf":
        return mf_generate_scenarios(config.n_episodes, seed=config.seed)
    return casino_generate_scenarios(config.n_episodes, seed=config.seed)


def run_episode(config: ExperimentConfig, game_obj, repetition: int, index: int) -> EpisodeRecord:
    seed = episode_seed(config.seed, repetition, index)
    scripted = config.generator.backend == "scripted"
    try:
        if config.game == "ckbg":
            agents = _scripted_ckbg(config, game_obj, seed) if scripted else _live_agents(config, game_obj, seed)
            outcome, transcript = ckbg_run_episode(
                game_obj, *agents, max_turns=config.max_turns or 10, episode_seed=seed
            )
        elif config.game == "mf":
            agents = _scripted_mf(config, game_obj, seed) if scripted else _live_agents(config, game_obj, seed)
            outcome, transcript = mf_run_episode(
                game_obj, *agents, max_turns=config.max_turns or 20, episode_seed=seed
            )
        else:
            agents = _scripted_casino(config, game_obj, seed) if scripted else _live_agents(config, game_obj, seed)
            outcome, transcript = casino_run_episode(
                game_obj, *agents, max_turns=config.max_turns or 12, episode_seed=seed
            )
    except TransportError as exc:
        outcome = EpisodeOutcome(game_id=config.game)
        return EpisodeRecord(
            config.fingerprint(), config.game, repetition, index, seed,
            "infra_failure", outcome, [{"error": str(exc)}],
        )
    status = "format_error" if outcome.format_error else "ok"
    return EpisodeRecord(
        config.fingerprint(), config.game, repetition, index, seed, status, outcome, transcript
    )


def run_experiment(config: ExperimentConfig) -> tuple[MetricsReport, list[EpisodeRecord]]:
    """All repetitions of all episodes; persists records when an output
    path is configured, then aggregates."""
    game_objects = _game_objects(config)
    records: list[EpisodeRecord] = []
    for repetition in range(config.repetitions):
        for index, game_obj in enumerate(game_objects):
            records.append(run_episode(config, game_obj, repetition, index))
    if config.output_path:
        persist_records(records, config.output_path)
        report = compute_metrics(records, config.game)
        with open(config.output_path + ".report.json", "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
        return report, records
    return compute_metrics(records, config.game), records


def replay_episode(config: ExperimentConfig, record: EpisodeRecord) -> EpisodeRecord:
    """Re-run one recorded episode from its config and seed."""
    game_objects = _game_objects(config)
    return run_episode(config, game_objects[record.index], record.repetition, record.index)
