"""Conditional Keeper-Burglar Game: dataset generator, world events, and
the keeper/burglar episode loop.

The world set per setting is five base events (container existence, both
contents, the keeper's goal, the keeper's lie propensity) plus one event
per instantiated condition, drawn from five condition classes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

from ..beliefs import (
    BeliefVector,
    DialogueContext,
    Estimator,
    Event,
    Perspective,
    WorldSet,
)
from ..epistemic import ActKind
from ..errors import DomainError
from ..generation import (
    ActionKind,
    Generator,
    Utterance,
    minddial_condition,
    parse_action,
    render_prompt,
)
from ..selection import ALL, ActConstraint, SelectionPolicy, choose, compose_condition, feasible_set
from .base import DialogueAgent, EpisodeOutcome

CONDITION_CLASSES = (
    "informer",
    "burglar_inspection",
    "keeper_inspection",
    "outsider_inspection",
    "noise",
)

BASE_EVENT_COUNT = 5
DEFAULT_MAX_TURNS = 10

FORCED_CHOICE_PROMPT = (
    "Time is up. You must choose now. Reply with a line of the form "
    '"[STOP] Burglar chosed: <container>." naming exactly one container.'
)


def _load_words(name: str) -> list[str]:
    text = resources.files("beda.data").joinpath(name).read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


@dataclass(frozen=True)
class CkbgCondition:
    kind: str
    container: str | None = None
    time: int | None = None
    obj: str | None = None
    friend: str | None = None

    def __post_init__(self):
        if self.kind not in CONDITION_CLASSES:
            raise DomainError(f"unknown condition class {self.kind!r}")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "container": self.container,
            "time": self.time,
            "obj": self.obj,
            "friend": self.friend,
        }

    @staticmethod
    def from_dict(doc: Mapping) -> "CkbgCondition":
        return CkbgCondition(
            doc["kind"], doc.get("container"), doc.get("time"), doc.get("obj"), doc.get("friend")
        )


@dataclass(frozen=True)
class CkbgSetting:
    keeper_name: str
    burglar_name: str
    friend_name: str
    containers: tuple[str, str]
    valuable: str
    valuable_container: str
    decoy: str
    conditions: tuple[CkbgCondition, ...]
    keeper_known: frozenset[int]
    burglar_known: frozenset[int]

    def __post_init__(self):
        if self.valuable_container not in self.containers:
            raise DomainError("valuable container must be one of the two containers")
        kinds = [c.kind for c in self.conditions]
        if len(set(kinds)) != len(kinds):
            raise DomainError("condition classes must be distinct within a setting")
        indices = set(range(len(self.conditions)))
        if (self.keeper_known | self.burglar_known) != indices:
            raise DomainError("every condition must be known to at least one side")

    @property
    def decoy_container(self) -> str:
        a, b = self.containers
        return b if self.valuable_container == a else a

    def to_dict(self) -> dict:
        return {
            "keeper_name": self.keeper_name,
            "burglar_name": self.burglar_name,
            "friend_name": self.friend_name,
            "containers": list(self.containers),
            "valuable": self.valuable,
            "valuable_container": self.valuable_container,
            "decoy": self.decoy,
            "conditions": [c.to_dict() for c in self.conditions],
            "keeper_known": sorted(self.keeper_known),
            "burglar_known": sorted(self.burglar_known),
        }

    @staticmethod
    def from_dict(doc: Mapping) -> "CkbgSetting":
        return CkbgSetting(
            keeper_name=doc["keeper_name"],
            burglar_name=doc["burglar_name"],
            friend_name=doc["friend_name"],
            containers=tuple(doc["containers"]),
            valuable=doc["valuable"],
            valuable_container=doc["valuable_container"],
            decoy=doc["decoy"],
            conditions=tuple(CkbgCondition.from_dict(c) for c in doc["conditions"]),
            keeper_known=frozenset(doc["keeper_known"]),
            burglar_known=frozenset(doc["burglar_known"]),
        )


@dataclass(frozen=True)
class DatasetSummary:
    settings: int
    conditions: int
    known_conditions: int
    avg_conditions: float

    def to_dict(self) -> dict:
        return {
            "settings": self.settings,
            "conditions": self.conditions,
            "known_conditions": self.known_conditions,
            "avg_conditions": self.avg_conditions,
        }


def summarize_dataset(settings: Sequence[CkbgSetting]) -> DatasetSummary:
    conditions = sum(len(s.conditions) for s in settings)
    known = sum(len(s.keeper_known) + len(s.burglar_known) for s in settings)
    return DatasetSummary(
        settings=len(settings),
        conditions=conditions,
        known_conditions=known,
        avg_conditions=conditions / len(settings) if settings else 0.0,
    )


def _draw_count(distribution, rng: random.Random) -> int:
    if isinstance(distribution, int):
        return distribution
    counts = sorted(distribution)
    weights = [distribution[c] for c in counts]
    return rng.choices(counts, weights=weights, k=1)[0]


def _instantiate(kind: str, containers, objects, friend: str, rng: random.Random) -> CkbgCondition:
    if kind == "informer":
        return CkbgCondition(kind)
    container = rng.choice(containers)
    time = rng.randint(1, 12)
    if kind == "burglar_inspection":
        return CkbgCondition(kind, container=container, time=time, obj=rng.choice(objects))
    if kind == "keeper_inspection":
        return CkbgCondition(kind, container=container, time=time)
    if kind == "outsider_inspection":
        return CkbgCondition(kind, container=container, time=time, friend=friend)
    return CkbgCondition(kind, container=container)  # noise


def ckbg_generate_dataset(
    n_settings: int,
    condition_count_distribution: int | Mapping[int, float] = 3,
    seed: int = 0,
) -> tuple[list[CkbgSetting], DatasetSummary]:
    """Randomized settings with per-setting condition counts drawn from the
    configured distribution; deterministic from the seed."""
    if n_settings < 1:
        raise DomainError("n_settings must be >= 1")
    rng = random.Random(seed)
    containers_pool = _load_words("containers.txt")
    valuables = _load_words("valuables.txt")
    decoys = _load_words("decoys.txt")
    names = _load_words("names.txt")

    settings: list[CkbgSetting] = []
    for _ in range(n_settings):
        keeper, burglar, friend = rng.sample(names, 3)
        containers = tuple(rng.sample(containers_pool, 2))
        valuable = rng.choice(valuables)
        decoy = rng.choice(decoys)
        count = max(0, min(_draw_count(condition_count_distribution, rng), len(CONDITION_CLASSES)))
        kinds = rng.sample(CONDITION_CLASSES, count)
        conditions = tuple(
            _instantiate(kind, containers, decoys + valuables, friend, rng) for kind in kinds
        )
        keeper_known: set[int] = set()
        burglar_known: set[int] = set()
        for idx in range(len(conditions)):
            side = rng.choice(("keeper", "burglar", "both"))
            if side in ("keeper", "both"):
                keeper_known.add(idx)
            if side in ("burglar", "both"):
                burglar_known.add(idx)
        settings.append(
            CkbgSetting(
                keeper_name=keeper,
                burglar_name=burglar,
                friend_name=friend,
                containers=containers,
                valuable=valuable,
                valuable_container=rng.choice(containers),
                decoy=decoy,
                conditions=conditions,
                keeper_known=frozenset(keeper_known),
                burglar_known=frozenset(burglar_known),
            )
        )
    return settings, summarize_dataset(settings)


def _condition_text(setting: CkbgSetting, condition: CkbgCondition) -> str:
    k, b = setting.keeper_name, setting.burglar_name
    if condition.kind == "informer":
        return f"The burglar {b} has been informed that the keeper {k} may lie to him."
    if condition.kind == "burglar_inspection":
        return (
            f"The burglar {b} opened the {condition.container} {condition.time} hours ago "
            f"and saw a {condition.obj} in it."
        )
    if condition.kind == "keeper_inspection":
        return f"The keeper {k} opened the {condition.container} {condition.time} hours ago."
    if condition.kind == "outsider_inspection":
        return (
            f"The burglar's friend {condition.friend} opened the {condition.container} "
            f"{condition.time} hours ago."
        )
    return f"A noise is coming from the {condition.container}."


def ckbg_world_events(setting: CkbgSetting) -> WorldSet:
    """Base events followed by the instantiated conditions, ids stable."""
    c1, c2 = setting.containers
    k, b = setting.keeper_name, setting.burglar_name
    texts = [
        f"There is a {c1} and a {c2} in the room.",
        f"The {setting.valuable_container} contains a {setting.valuable}.",
        f"The {setting.decoy_container} contains a {setting.decoy}.",
        f"The keeper {k}'s goal is to mislead burglar {b}.",
        f"The keeper {k} probably lies to the burglar {b}.",
    ]
    texts += [_condition_text(setting, c) for c in setting.conditions]
    return WorldSet(tuple(Event(i, t) for i, t in enumerate(texts)))


def keeper_true_events(setting: CkbgSetting) -> frozenset[int]:
    """World-event ids the keeper knows to be true: all base events plus
    the conditions assigned to the keeper."""
    return frozenset(range(BASE_EVENT_COUNT)) | frozenset(
        BASE_EVENT_COUNT + i for i in setting.keeper_known
    )


def burglar_known_events(setting: CkbgSetting) -> frozenset[int]:
    """Ground truth of what the burglar knows: existence, the keeper's
    adversarial goal and lie propensity, plus his assigned conditions."""
    return frozenset({0, 3, 4}) | frozenset(BASE_EVENT_COUNT + i for i in setting.burglar_known)


def keeper_task(setting: CkbgSetting) -> str:
    return (
        f"Convince the burglar {setting.burglar_name} that the {setting.valuable} "
        f"is not in the {setting.valuable_container}, so that he picks the "
        f"{setting.decoy_container}."
    )


def burglar_task(setting: CkbgSetting) -> str:
    c1, c2 = setting.containers
    return (
        f"Find out which container holds the {setting.valuable}: the {c1} or the {c2}. "
        "When sure, stop and choose one."
    )


def episode_context(setting: CkbgSetting) -> DialogueContext:
    c1, c2 = setting.containers
    background = (
        f"A {c1} and a {c2} are in the room. The keeper is {setting.keeper_name}; "
        f"the burglar is {setting.burglar_name}."
    )
    return DialogueContext(task=keeper_task(setting), background=background)


class CkbgKeeperAgent(DialogueAgent):
    """The keeper's full pipeline: estimate beliefs, filter the world set
    through the adversarial constraint, render and generate."""

    def __init__(
        self,
        setting: CkbgSetting,
        generator: Generator,
        self_estimator: Estimator | None = None,
        opp_estimator: Estimator | None = None,
        epsilon: float = 0.5,
        policy: SelectionPolicy = ALL,
        method: str = "beda",
    ):
        self.name = setting.keeper_name
        self.setting = setting
        self.world_set = ckbg_world_events(setting)
        self.generator = generator
        self.self_estimator = self_estimator
        self.opp_estimator = opp_estimator
        self.epsilon = epsilon
        self.policy = policy
        self.method = method  # beda | wo_belief | minddial

    def _condition_slots(self, context, episode_seed, turn_index):
        info: dict = {}
        if self.method == "wo_belief" or self.self_estimator is None:
            return {"user_U": "(unknown)", "machine_U": "(unknown)"}, info
        self_truth = self.self_estimator.estimate(context, self.world_set, Perspective.SELF_TRUTH)
        opp_knows = self.opp_estimator.estimate(context, self.world_set, Perspective.OPPONENT_KNOWS)
        info["self_truth"] = list(self_truth.values)
        info["opp_knows"] = list(opp_knows.values)
        if self.method == "minddial":
            return {
                "user_U": minddial_condition(self_truth, opp_knows, self.world_set),
                "machine_U": compose_condition(sorted(self_truth.known_set()), self.world_set, "ckbg"),
            }, info
        feasible = feasible_set(
            self_truth, opp_knows, ActConstraint(ActKind.ADVERSARIAL, self.epsilon)
        )
        result = choose(feasible, self.policy, seed=hash((episode_seed, turn_index)) & 0xFFFFFFFF)
        info["feasible"] = sorted(result.feasible)
        info["chosen"] = list(result.chosen)
        info["fallback"] = result.fallback
        opp_known = sorted(opp_knows.known_set())
        user_u = compose_condition(opp_known, self.world_set, "ckbg") if opp_known else "(unknown)"
        return {
            "user_U": user_u,
            "machine_U": compose_condition(result.chosen, self.world_set, "ckbg"),
        }, info

    def respond(self, context, episode_seed, turn_index):
        slots, info = self._condition_slots(context, episode_seed, turn_index)
        slots.update({"context": context.background, "task": keeper_task(self.setting)})
        prompt = render_prompt("ckbg", "keeper", context, "", slots, self_name=self.name)
        info["system_prompt"] = prompt.system
        utterance = self.generator.generate(prompt)
        return utterance, info


class CkbgBurglarAgent(DialogueAgent):
    """Plain conditional generation from the burglar's known events."""

    def __init__(self, setting: CkbgSetting, generator: Generator):
        self.name = setting.burglar_name
        self.setting = setting
        self.world_set = ckbg_world_events(setting)
        self.generator = generator

    def respond(self, context, episode_seed, turn_index):
        known = sorted(burglar_known_events(self.setting))
        slots = {
            "context": context.background,
            "user_U": "(unknown)",
            "machine_U": compose_condition(known, self.world_set, "ckbg"),
            "task": burglar_task(self.setting),
        }
        prompt = render_prompt("ckbg", "burglar", context, "", slots, self_name=self.name)
        utterance = self.generator.generate(prompt)
        return utterance, {"system_prompt": prompt.system}


def ckbg_run_episode(
    setting: CkbgSetting,
    keeper_agent: DialogueAgent,
    burglar_agent: DialogueAgent,
    max_turns: int = DEFAULT_MAX_TURNS,
    episode_seed: int = 0,
) -> tuple[EpisodeOutcome, list[dict]]:
    """Alternating turns starting with the burglar; ends on the burglar's
    stop-choice or a forced choice at the turn cap. Success means the
    burglar picked the wrong container."""
    if max_turns < 1:
        raise DomainError("max_turns must be >= 1")
    context = episode_context(setting)
    outcome = EpisodeOutcome(game_id="ckbg")
    transcript: list[dict] = []
    choice: str | None = None

    for turn_index in range(max_turns):
        agent = burglar_agent if turn_index % 2 == 0 else keeper_agent
        utterance, info = agent.respond(context, episode_seed, turn_index)
        outcome.turns += 1
        outcome.tokens_by_side[agent.name] = (
            outcome.tokens_by_side.get(agent.name, 0) + utterance.token_count
        )
        outcome.fallback_count += 1 if info.get("fallback") else 0
        transcript.append({"speaker": agent.name, "text": utterance.text, **info})
        context = context.with_turn(agent.name, utterance.text)
        if agent is burglar_agent:
            action = parse_action("ckbg", utterance, containers=setting.containers)
            if action.kind is ActionKind.STOP_CHOICE:
                choice = action.container
                break
            if action.kind is ActionKind.FORMAT_ERROR:
                outcome.format_error = True
                return outcome, transcript

    if choice is None:
        context = context.with_turn("SYSTEM", FORCED_CHOICE_PROMPT)
        transcript.append({"speaker": "SYSTEM", "text": FORCED_CHOICE_PROMPT})
        utterance, info = burglar_agent.respond(context, episode_seed, max_turns)
        outcome.turns += 1
        outcome.tokens_by_side[burglar_agent.name] = (
            outcome.tokens_by_side.get(burglar_agent.name, 0) + utterance.token_count
        )
        transcript.append({"speaker": burglar_agent.name, "text": utterance.text, **info})
        action = parse_action("ckbg", utterance, containers=setting.containers, terminal=True)
        if action.kind is not ActionKind.STOP_CHOICE:
            outcome.format_error = True
            return outcome, transcript
        choice = action.container

    outcome.chosen_container = choice
    outcome.success = choice != setting.valuable_container
    return outcome, transcript
