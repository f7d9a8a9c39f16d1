"""CaSiNo campsite negotiation: 24-event world set over preference
permutations, the two-event mixed strategy, and the deal protocol.

Stock is 3 units per resource; a unit scores 5/4/3 points by preference
rank, the original dataset's convention (configurable via the points
argument of ``casino_reward``).
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Mapping, Sequence

from ..beliefs import DialogueContext, Estimator, Event, Perspective, WorldSet
from ..errors import DomainError
from ..generation import ActionKind, Generator, parse_action, render_prompt
from ..selection import mixed_select
from .base import DialogueAgent, EpisodeOutcome

RESOURCES = ("food", "water", "firewood")
STOCK = 3
DEFAULT_POINTS = (5, 4, 3)  # most, middle, least preferred
DEFAULT_MAX_TURNS = 12

# Fixed canonical ordering: most-preferred resource first, then the rest.
PREFERENCE_PERMUTATIONS: tuple[tuple[str, str, str], ...] = (
    ("water", "firewood", "food"),
    ("water", "food", "firewood"),
    ("firewood", "water", "food"),
    ("firewood", "food", "water"),
    ("food", "water", "firewood"),
    ("food", "firewood", "water"),
)


def _preference_clause(perm: Sequence[str]) -> str:
    a, b, c = perm
    return f"the most important thing is {a}, followed by {b}, and lastly {c}"


@dataclass(frozen=True)
class CasinoScenario:
    name_1: str
    name_2: str
    preference_1: tuple[str, str, str]
    preference_2: tuple[str, str, str]

    def __post_init__(self):
        for perm in (self.preference_1, self.preference_2):
            if tuple(perm) not in PREFERENCE_PERMUTATIONS:
                raise DomainError(f"not a preference permutation: {perm!r}")
        if self.name_1 == self.name_2:
            raise DomainError("negotiator names must differ")

    def preference_of(self, name: str) -> tuple[str, str, str]:
        if name == self.name_1:
            return self.preference_1
        if name == self.name_2:
            return self.preference_2
        raise DomainError(f"unknown negotiator {name!r}")

    def to_dict(self) -> dict:
        return {
            "name_1": self.name_1,
            "name_2": self.name_2,
            "preference_1": list(self.preference_1),
            "preference_2": list(self.preference_2),
        }

    @staticmethod
    def from_dict(doc: Mapping) -> "CasinoScenario":
        return CasinoScenario(
            doc["name_1"], doc["name_2"], tuple(doc["preference_1"]), tuple(doc["preference_2"])
        )


def casino_generate_scenarios(n: int, seed: int = 0) -> list[CasinoScenario]:
    if n < 1:
        raise DomainError("n must be >= 1")
    rng = random.Random(seed)
    return [
        CasinoScenario(
            "Negotiator 1",
            "Negotiator 2",
            rng.choice(PREFERENCE_PERMUTATIONS),
            rng.choice(PREFERENCE_PERMUTATIONS),
        )
        for _ in range(n)
    ]


def casino_world_set(name_1: str, name_2: str) -> WorldSet:
    """Exactly 24 events: 6 assertive per negotiator, then 6 negated per
    negotiator, in the fixed permutation order."""
    if name_1 == name_2:
        raise DomainError("negotiator names must differ")
    events = []
    for verb in ("is", "isn't"):
        for name in (name_1, name_2):
            for perm in PREFERENCE_PERMUTATIONS:
                events.append(
                    Event(
                        len(events),
                        f"The {name}'s preference {verb}: {_preference_clause(perm)}.",
                        {"negotiator": name, "polarity": verb, "permutation": ">".join(perm)},
                    )
                )
    return WorldSet(tuple(events))


def casino_reward(
    preference: Sequence[str],
    allocation: tuple[int, int, int],
    points: tuple[int, int, int] = DEFAULT_POINTS,
) -> int:
    """Points for an allocation given in (food, water, firewood) order."""
    if tuple(preference) not in PREFERENCE_PERMUTATIONS:
        raise DomainError(f"not a preference permutation: {preference!r}")
    if any(not 0 <= units <= STOCK for units in allocation):
        raise DomainError(f"allocation units must be in 0..{STOCK}: {allocation!r}")
    per_unit = {resource: points[rank] for rank, resource in enumerate(preference)}
    return sum(units * per_unit[resource] for resource, units in zip(RESOURCES, allocation))


def deals_complementary(deal_1: tuple[int, int, int], deal_2: tuple[int, int, int]) -> bool:
    return all(a + b == STOCK for a, b in zip(deal_1, deal_2))


class CasinoNegotiatorAgent(DialogueAgent):
    """One negotiator: the mixed two-event strategy fills the prompt's
    belief slots, the generator produces the utterance and deal lines."""

    def __init__(
        self,
        scenario: CasinoScenario,
        name: str,
        generator: Generator,
        self_estimator: Estimator | None = None,
        opp_estimator: Estimator | None = None,
        epsilon: float = 0.5,
        method: str = "beda",
    ):
        self.name = name
        self.scenario = scenario
        self.opponent = scenario.name_2 if name == scenario.name_1 else scenario.name_1
        self.world_set = casino_world_set(scenario.name_1, scenario.name_2)
        self.generator = generator
        self.self_estimator = self_estimator
        self.opp_estimator = opp_estimator
        self.epsilon = epsilon
        self.method = method

    def _belief_slots(self, context, episode_seed, turn_index):
        info: dict = {}
        gt = _preference_clause(self.scenario.preference_of(self.name))
        if self.method == "wo_belief" or self.self_estimator is None:
            return {"belief_state_self": "(unknown)", "belief_state_opponent": "(unknown)",
                    "belief_state_gt": gt}, info
        self_truth = self.self_estimator.estimate(context, self.world_set, Perspective.SELF_TRUTH)
        opp_knows = self.opp_estimator.estimate(context, self.world_set, Perspective.OPPONENT_KNOWS)
        selection = mixed_select(
            self_truth, opp_knows, self.epsilon, seed=hash((episode_seed, turn_index)) & 0xFFFFFFFF
        )
        info["alignment"] = selection.alignment
        info["adversarial"] = selection.adversarial
        info["fallback"] = selection.alignment_fallback and selection.adversarial_fallback
        self_text = (
            self.world_set.events[selection.adversarial].text
            if selection.adversarial is not None
            else "(unknown)"
        )
        opp_text = (
            self.world_set.events[selection.alignment].text
            if selection.alignment is not None
            else "(unknown)"
        )
        return {
            "belief_state_self": self_text,
            "belief_state_opponent": opp_text,
            "belief_state_gt": gt,
        }, info

    def respond(self, context, episode_seed, turn_index):
        slots, info = self._belief_slots(context, episode_seed, turn_index)
        slots["opponent_name"] = self.opponent
        prompt = render_prompt("casino", "negotiator", context, "", slots, self_name=self.name)
        info["system_prompt"] = prompt.system
        utterance = self.generator.generate(prompt)
        return utterance, info


def casino_run_episode(
    scenario: CasinoScenario,
    agent_1: DialogueAgent,
    agent_2: DialogueAgent,
    max_turns: int = DEFAULT_MAX_TURNS,
    episode_seed: int = 0,
) -> tuple[EpisodeOutcome, list[dict]]:
    """Alternating turns; agreement when both sides' latest deal lines sum
    to the stock per resource. Rewards only exist on agreement."""
    context = DialogueContext(
        task="Negotiate how to split 3 food, 3 water, and 3 firewood packages.",
        background=f"{scenario.name_1} and {scenario.name_2} are campsite neighbors.",
    )
    outcome = EpisodeOutcome(game_id="casino", agreement=False)
    transcript: list[dict] = []
    latest_deal: dict[str, tuple[int, int, int]] = {}

    for turn_index in range(max_turns):
        agent = agent_1 if turn_index % 2 == 0 else agent_2
        utterance, info = agent.respond(context, episode_seed, turn_index)
        outcome.turns += 1
        outcome.tokens_by_side[agent.name] = (
            outcome.tokens_by_side.get(agent.name, 0) + utterance.token_count
        )
        outcome.fallback_count += 1 if info.get("fallback") else 0
        action = parse_action("casino", utterance)
        if action.kind is ActionKind.DEAL:
            latest_deal[agent.name] = action.deal
            info["deal"] = list(action.deal)
        transcript.append({"speaker": agent.name, "text": utterance.text, **info})
        context = context.with_turn(agent.name, utterance.text)
        if len(latest_deal) == 2 and deals_complementary(
            latest_deal[agent_1.name], latest_deal[agent_2.name]
        ):
            outcome.agreement = True
            outcome.rewards = {
                name: casino_reward(scenario.preference_of(name), deal)
                for name, deal in latest_deal.items()
            }
            break

    return outcome, transcript
