"""Mutual Friends: find the one friend two players share, cooperatively,
within 20 turns.

World events are (attribute, value) suspicions about the mutual friend,
one per pair occurring in either list. Each side conditions its turns on
the alignment-feasible events, deduplicated to one value per attribute.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from importlib import resources
from typing import Mapping, Sequence

from ..beliefs import DialogueContext, Estimator, Event, Perspective, WorldSet
from ..epistemic import ActKind
from ..errors import DomainError
from ..generation import (
    ActionKind,
    Generator,
    Utterance,
    parse_action,
    render_prompt,
)
from ..selection import ActConstraint, compose_condition, feasible_set
from .base import DialogueAgent, EpisodeOutcome

DEFAULT_MAX_TURNS = 20
CONFIRM_TOKEN = "CONFIRM:"

FINAL_PICK_PROMPT = (
    "The dialogue has ended. From your own friend list, name the mutual friend. "
    'Reply with "Friend #<index>" using the 1-based position in your list.'
)

DEFAULT_ATTRIBUTES = ("School", "Major", "Hobby")
_ATTRIBUTE_FILES = {"School": "mf_schools.txt", "Major": "mf_majors.txt", "Hobby": "mf_hobbies.txt"}


def _load_words(name: str) -> list[str]:
    text = resources.files("beda.data").joinpath(name).read_text(encoding="utf-8")
    return [line.strip() for line in text.splitlines() if line.strip()]


@dataclass(frozen=True)
class MfScenario:
    attributes: tuple[str, ...]
    list_a: tuple[Mapping[str, str], ...]
    list_b: tuple[Mapping[str, str], ...]
    name_a: str = "Bob"
    name_b: str = "Alex"

    def __post_init__(self):
        def as_tuple(friend):
            return tuple(friend[a] for a in self.attributes)

        shared = {as_tuple(f) for f in self.list_a} & {as_tuple(f) for f in self.list_b}
        if len(shared) != 1:
            raise DomainError(f"exactly one mutual friend required, found {len(shared)}")

    def friend_tuple(self, friend: Mapping[str, str]) -> tuple[str, ...]:
        return tuple(friend[a] for a in self.attributes)

    @property
    def mutual(self) -> tuple[str, ...]:
        shared = {self.friend_tuple(f) for f in self.list_a} & {
            self.friend_tuple(f) for f in self.list_b
        }
        return next(iter(shared))

    def to_dict(self) -> dict:
        return {
            "attributes": list(self.attributes),
            "list_a": [dict(f) for f in self.list_a],
            "list_b": [dict(f) for f in self.list_b],
            "name_a": self.name_a,
            "name_b": self.name_b,
        }

    @staticmethod
    def from_dict(doc: Mapping) -> "MfScenario":
        return MfScenario(
            attributes=tuple(doc["attributes"]),
            list_a=tuple(doc["list_a"]),
            list_b=tuple(doc["list_b"]),
            name_a=doc.get("name_a", "Bob"),
            name_b=doc.get("name_b", "Alex"),
        )


def mf_generate_scenarios(
    n: int,
    seed: int = 0,
    list_size: int = 5,
    attributes: Sequence[str] = DEFAULT_ATTRIBUTES,
) -> list[MfScenario]:
    """Random friend lists sharing exactly one attribute tuple."""
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = random.Random(seed)
    pools = {a: _load_words(_ATTRIBUTE_FILES[a]) for a in attributes}

    def draw_friend():
        return {a: rng.choice(pools[a]) for a in attributes}

    scenarios = []
    for _ in range(n):
        mutual = draw_friend()
        mutual_tuple = tuple(mutual[a] for a in attributes)

        def fill_list():
            friends = [dict(mutual)]
            seen = {mutual_tuple}
            while len(friends) < list_size:
                friend = draw_friend()
                key = tuple(friend[a] for a in attributes)
                if key in seen:
                    continue
                seen.add(key)
                friends.append(friend)
            rng.shuffle(friends)
            return tuple(friends)

        list_a = fill_list()
        # The second list must not share any non-mutual tuple with the first.
        taken = {tuple(f[a] for a in attributes) for f in list_a}
        friends_b = [dict(mutual)]
        seen_b = {mutual_tuple}
        while len(friends_b) < list_size:
            friend = draw_friend()
            key = tuple(friend[a] for a in attributes)
            if key in seen_b or key in taken:
                continue
            seen_b.add(key)
            friends_b.append(friend)
        rng.shuffle(friends_b)
        scenarios.append(MfScenario(tuple(attributes), list_a, tuple(friends_b)))
    return scenarios


def mf_world_events(scenario: MfScenario, perspective_owner: str) -> WorldSet:
    """One suspicion event per (attribute, value) pair in either list,
    phrased about the perspective owner's interlocutor."""
    interlocutor = scenario.name_b if perspective_owner == scenario.name_a else scenario.name_a
    pairs: list[tuple[str, str]] = []
    seen = set()
    for attribute in scenario.attributes:
        for friend in scenario.list_a + scenario.list_b:
            pair = (attribute, friend[attribute])
            if pair not in seen:
                seen.add(pair)
                pairs.append(pair)
    events = tuple(
        Event(
            i,
            f"The {interlocutor} suspects the {attribute} of the mutual friend is {value}.",
            {"attribute": attribute, "value": value, "interlocutor": interlocutor},
        )
        for i, (attribute, value) in enumerate(pairs)
    )
    return WorldSet(events)


def dedupe_by_attribute(chosen, world_set: WorldSet, context: DialogueContext):
    """At most one value per attribute; the value backed by the most recent
    turn wins, falling back to the lowest event id."""
    joined = [u.lower() for _, u in context.turns]

    def recency(event_id: int) -> int:
        value = world_set.events[event_id].payload["value"].lower()
        for age, utterance in enumerate(reversed(joined)):
            if value in utterance:
                return -age
        return -len(joined) - 1

    best: dict[str, int] = {}
    for event_id in sorted(chosen):
        attribute = world_set.events[event_id].payload["attribute"]
        if attribute not in best or recency(event_id) > recency(best[attribute]):
            best[attribute] = event_id
    return sorted(best.values())


class MfPlayerAgent(DialogueAgent):
    """One cooperative player: alignment selection over suspicion events."""

    def __init__(
        self,
        scenario: MfScenario,
        name: str,
        generator: Generator,
        self_estimator: Estimator | None = None,
        opp_estimator: Estimator | None = None,
        epsilon: float = 0.5,
        method: str = "beda",
    ):
        self.name = name
        self.scenario = scenario
        self.opponent = scenario.name_b if name == scenario.name_a else scenario.name_a
        self.world_set = mf_world_events(scenario, name)
        self.generator = generator
        self.self_estimator = self_estimator
        self.opp_estimator = opp_estimator
        self.epsilon = epsilon
        self.method = method

    def _belief_sentence(self, context):
        info: dict = {}
        if self.method == "wo_belief" or self.self_estimator is None:
            return "(unknown)", info
        self_truth = self.self_estimator.estimate(context, self.world_set, Perspective.SELF_TRUTH)
        opp_knows = self.opp_estimator.estimate(context, self.world_set, Perspective.OPPONENT_KNOWS)
        feasible = feasible_set(
            self_truth, opp_knows, ActConstraint(ActKind.ALIGNMENT, self.epsilon)
        )
        chosen = dedupe_by_attribute(feasible, self.world_set, context)
        info["feasible"] = sorted(feasible)
        info["chosen"] = chosen
        info["fallback"] = not chosen
        if not chosen:
            return "(unknown)", info
        return compose_condition(chosen, self.world_set, "mf"), info

    def respond(self, context, episode_seed, turn_index):
        sentence, info = self._belief_sentence(context)
        slots = {"name_opponent": self.opponent, "belief_state_sentence": sentence}
        prompt = render_prompt("mf", "player", context, "", slots, self_name=self.name)
        info["system_prompt"] = prompt.system
        utterance = self.generator.generate(prompt)
        return utterance, info


def mf_judge(context: DialogueContext, judge_generator: Generator | None = None) -> bool:
    """Mutual confirmation: both of the latest two turns assert it.

    Rule path looks for the confirmation token; the live path asks the
    judge generator a yes/no question and treats anything but yes as no.
    """
    dialogue_turns = [(s, u) for s, u in context.turns if s != "SYSTEM"]
    if len(dialogue_turns) < 2:
        return False
    if judge_generator is None:
        return all(CONFIRM_TOKEN in u for _, u in dialogue_turns[-2:])
    from ..generation import Prompt

    question = Prompt(
        "You judge a dialogue. Answer strictly Yes or No: have both players "
        "confirmed the identity of the mutual friend?\n\n" + context.render()
    )
    answer = judge_generator.generate(question).text.strip().lower()
    return answer.startswith("yes")


def _final_pick(agent: DialogueAgent, context, episode_seed, own_list, turn_index):
    utterance, info = agent.respond(context, episode_seed, turn_index)
    action = parse_action("mf", utterance, friends=own_list, terminal=True)
    pick = action.friend_id if action.kind is ActionKind.FRIEND_PICK else None
    return utterance, info, pick


def mf_run_episode(
    scenario: MfScenario,
    agent_a: DialogueAgent,
    agent_b: DialogueAgent,
    max_turns: int = DEFAULT_MAX_TURNS,
    episode_seed: int = 0,
    judge_generator: Generator | None = None,
) -> tuple[EpisodeOutcome, list[dict]]:
    """Symmetric loop with a judge after every turn; success iff the two
    final picks denote the same friend."""
    context = DialogueContext(
        task="Identify the one friend you both share.",
        background=f"{scenario.name_a} and {scenario.name_b} each hold a private friend list.",
    )
    outcome = EpisodeOutcome(game_id="mf")
    transcript: list[dict] = []

    confirmed = False
    for turn_index in range(max_turns):
        agent = agent_a if turn_index % 2 == 0 else agent_b
        utterance, info = agent.respond(context, episode_seed, turn_index)
        outcome.turns += 1
        outcome.tokens_by_side[agent.name] = (
            outcome.tokens_by_side.get(agent.name, 0) + utterance.token_count
        )
        outcome.fallback_count += 1 if info.get("fallback") else 0
        transcript.append({"speaker": agent.name, "text": utterance.text, **info})
        context = context.with_turn(agent.name, utterance.text)
        if mf_judge(context, judge_generator):
            confirmed = True
            break

    context = context.with_turn("SYSTEM", FINAL_PICK_PROMPT)
    transcript.append({"speaker": "SYSTEM", "text": FINAL_PICK_PROMPT})
    picks: dict[str, int | None] = {}
    tuples: dict[str, tuple[str, ...] | None] = {}
    for agent, own_list in ((agent_a, scenario.list_a), (agent_b, scenario.list_b)):
        utterance, info, pick = _final_pick(agent, context, episode_seed, own_list, max_turns)
        outcome.tokens_by_side[agent.name] = (
            outcome.tokens_by_side.get(agent.name, 0) + utterance.token_count
        )
        transcript.append({"speaker": agent.name, "text": utterance.text, "final_pick": pick, **info})
        picks[agent.name] = pick
        tuples[agent.name] = scenario.friend_tuple(own_list[pick]) if pick is not None else None

    outcome.picks = picks
    if None in picks.values():
        outcome.format_error = True
        return outcome, transcript
    outcome.success = tuples[agent_a.name] == tuples[agent_b.name]
    _ = confirmed
    return outcome, transcript
