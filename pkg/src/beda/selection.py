"""Constrained event selection: filter a world set through the act
constraints, then pick conditioning events with equal probability.

Selection never scores utterances. It fixes the event(s) first and leaves
the utterance entirely to the generator, which is what makes the
uniform-choice rule sufficient.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .beliefs import BeliefVector, Perspective, WorldSet
from .epistemic import ActKind
from .errors import DomainError

CASINO_WORLD_SIZE = 24
CASINO_ASSERTIVE = range(0, 12)
CASINO_NEGATED = range(12, 24)

FALLBACK_MARKER = "(no event satisfied the constraints; reply from the context alone)"


@dataclass(frozen=True)
class ActConstraint:
    act: ActKind
    epsilon: float

    def __post_init__(self):
        if not 0 <= self.epsilon < 1:
            raise DomainError(f"epsilon must be in [0, 1), got {self.epsilon!r}")


@dataclass(frozen=True)
class SelectionPolicy:
    kind: str  # "all" | "uniform_one" | "uniform_k"
    k: int = 1

    def __post_init__(self):
        if self.kind not in ("all", "uniform_one", "uniform_k"):
            raise DomainError(f"unknown selection policy {self.kind!r}")
        if self.kind == "uniform_k" and self.k < 1:
            raise DomainError("uniform_k requires k >= 1")


ALL = SelectionPolicy("all")
UNIFORM_ONE = SelectionPolicy("uniform_one")


def uniform_k(k: int) -> SelectionPolicy:
    return SelectionPolicy("uniform_k", k)


@dataclass(frozen=True)
class SelectionResult:
    feasible: frozenset[int]
    chosen: tuple[int, ...]
    fallback: bool


def feasible_set(
    self_truth: BeliefVector,
    opp_knows: BeliefVector,
    constraint: ActConstraint,
) -> frozenset[int]:
    """Event ids passing both act constraints at the given epsilon."""
    if self_truth.perspective is not Perspective.SELF_TRUTH:
        raise DomainError("first vector must carry the SELF_TRUTH perspective")
    if opp_knows.perspective is not Perspective.OPPONENT_KNOWS:
        raise DomainError("second vector must carry the OPPONENT_KNOWS perspective")
    if self_truth.world_set_size != opp_knows.world_set_size:
        raise DomainError("belief vectors cover different world sets")
    threshold = 1.0 - constraint.epsilon
    result = []
    for i, (truth, knows) in enumerate(zip(self_truth.values, opp_knows.values)):
        if truth < threshold:
            continue
        second = (1.0 - knows) if constraint.act is ActKind.ADVERSARIAL else knows
        if second >= threshold:
            result.append(i)
    return frozenset(result)


def choose(feasible, policy: SelectionPolicy, seed: int = 0) -> SelectionResult:
    """Pick conditioning events with equal probability over the feasible set."""
    feasible = frozenset(feasible)
    ordered = sorted(feasible)
    if not ordered:
        return SelectionResult(feasible, (), fallback=True)
    if policy.kind == "all":
        return SelectionResult(feasible, tuple(ordered), fallback=False)
    rng = random.Random(seed)
    if policy.kind == "uniform_one":
        return SelectionResult(feasible, (rng.choice(ordered),), fallback=False)
    k = min(policy.k, len(ordered))
    return SelectionResult(feasible, tuple(rng.sample(ordered, k)), fallback=False)


@dataclass(frozen=True)
class MixedSelection:
    alignment: int | None
    adversarial: int | None
    alignment_fallback: bool
    adversarial_fallback: bool


def mixed_select(
    self_truth: BeliefVector,
    opp_knows_of_self: BeliefVector,
    epsilon: float,
    seed: int = 0,
) -> MixedSelection:
    """CaSiNo's two-event strategy: one alignment event from the assertive
    half of the 24-event world set, one adversarial event from the negated
    half, each drawn uniformly and falling back independently when empty.
    """
    if self_truth.world_set_size != CASINO_WORLD_SIZE:
        raise DomainError(f"mixed_select requires a {CASINO_WORLD_SIZE}-event world set")
    align = feasible_set(self_truth, opp_knows_of_self, ActConstraint(ActKind.ALIGNMENT, epsilon))
    advers = feasible_set(self_truth, opp_knows_of_self, ActConstraint(ActKind.ADVERSARIAL, epsilon))
    align &= frozenset(CASINO_ASSERTIVE)
    advers &= frozenset(CASINO_NEGATED)
    rng = random.Random(seed)
    alignment = rng.choice(sorted(align)) if align else None
    adversarial = rng.choice(sorted(advers)) if advers else None
    return MixedSelection(
        alignment=alignment,
        adversarial=adversarial,
        alignment_fallback=alignment is None,
        adversarial_fallback=adversarial is None,
    )


def compose_condition(chosen, world_set: WorldSet, template: str) -> str:
    """Render the chosen events as the game's condition text.

    Distinct selections always render distinctly: event texts are unique
    within a world set and every rendering embeds them verbatim.
    """
    chosen = list(chosen)
    for i in chosen:
        if not 0 <= i < len(world_set):
            raise DomainError(f"chosen id {i} outside the world set")
    if template == "ckbg":
        if not chosen:
            return FALLBACK_MARKER
        return "\n".join(f"- {world_set.events[i].text}" for i in chosen)
    if template == "mf":
        if not chosen:
            return FALLBACK_MARKER
        return "; ".join(
            f"{world_set.events[i].payload['attribute']}: {world_set.events[i].payload['value']}"
            for i in chosen
        )
    if template == "casino":
        if not chosen:
            return FALLBACK_MARKER
        return " ".join(world_set.events[i].text for i in chosen)
    raise DomainError(f"unknown condition template {template!r}")
