"""Conditional utterance generation: prompt rendering, chat backends,
baseline wrappers, and action parsing.

The three game templates are pinned byte-for-byte by golden-file tests,
including the mutual-friends template's original wording ("whether there
a friend in your friend list that meet").
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Sequence

import requests

from .beliefs import BeliefVector, DialogueContext, WorldSet
from .errors import DomainError, TemplateError, TransportError

CKBG_TEMPLATE = (
    "Notice:\n"
    "1. Context: [context]\n"
    "2. Your opponent's belief state: [user_U]\n"
    "3. Your belief state: [machine_U]\n"
    "Based on the context, the opponent's belief state, and your belief state "
    "to provide your final choice to the following task: [task]."
)

MF_TEMPLATE = (
    "Notice:\n"
    "1. [name_opponent] currently considers the attributes of the mutual friend "
    "to be: **[belief_state_sentence].**\n"
    "2. You must confirm whether there a friend in your friend list that meet "
    "the above criteria; only then can they be identified as a mutual friend.\n"
    "3. When describing a friend, give all his attribute values.\n"
    "Please provide your utterance directly."
)

CASINO_TEMPLATE = (
    "Notice:\n"
    "1. [opponent_name] thinks that you think [belief_state_self].\n"
    "2. [opponent_name] thinks think [belief_state_opponent].\n"
    "3. In fact, for you, [belief_state_gt]\n"
    "Please provide your utterance directly."
)

TEMPLATES = {"ckbg": CKBG_TEMPLATE, "mf": MF_TEMPLATE, "casino": CASINO_TEMPLATE}

COT_INSTRUCTION = "Let's think step by step, then give your reply after the line \"Reply:\"."
COT_DELIMITER = "Reply:"
CRITIQUE_INSTRUCTION = (
    "Critique the draft reply below: point out anything unhelpful, "
    "off-strategy, or inconsistent with the notice."
)
REVISE_INSTRUCTION = "Rewrite the draft into a final reply that addresses the critique. Give only the reply."

_PLACEHOLDER = re.compile(r"\[([A-Za-z0-9_]+)\]")


@dataclass(frozen=True)
class Prompt:
    system: str
    turns: tuple[tuple[str, str], ...] = ()  # role in {interlocutor, self, system}

    def __post_init__(self):
        if not self.system:
            raise DomainError("system text must be non-empty")
        object.__setattr__(self, "turns", tuple((r, t) for r, t in self.turns))

    def self_turn_count(self) -> int:
        return sum(1 for role, _ in self.turns if role == "self")


def token_count(text: str) -> int:
    return len(text.split())


@dataclass(frozen=True)
class Utterance:
    text: str
    token_count: int
    format_ok: bool = True
    flags: tuple[str, ...] = ()

    @staticmethod
    def of(text: str, format_ok: bool = True, flags: tuple[str, ...] = ()) -> "Utterance":
        return Utterance(text, token_count(text), format_ok, flags)


@dataclass(frozen=True)
class GeneratorConfig:
    backend: str = "scripted"  # "scripted" or an endpoint URL
    model: str = ""
    temperature: float = 0.0
    max_turn_tokens: int = 512
    retries: int = 2

    def __post_init__(self):
        if self.temperature < 0:
            raise DomainError("temperature must be >= 0")
        if self.retries < 0:
            raise DomainError("retries must be >= 0")

    @staticmethod
    def from_env() -> "GeneratorConfig":
        return GeneratorConfig(
            backend=os.environ.get("GEN_ENDPOINT", "scripted"),
            model=os.environ.get("GEN_MODEL", ""),
        )


def fill_template(template: str, slots: Mapping[str, str]) -> str:
    """Substitute every [slot]; a placeholder without a value is an error."""
    placeholders = set(_PLACEHOLDER.findall(template))
    missing = placeholders - set(slots)
    if missing:
        raise TemplateError(f"missing slot(s): {', '.join(sorted(missing))}")
    pieces = []
    pos = 0
    for match in _PLACEHOLDER.finditer(template):
        pieces.append(template[pos : match.start()])
        pieces.append(str(slots[match.group(1)]))
        pos = match.end()
    pieces.append(template[pos:])
    return "".join(pieces)


ROLE_BACKGROUNDS = {
    ("ckbg", "keeper"): (
        "You are the homeowner. A burglar is in the room and will pick one of the "
        "two containers. Protect the valuable item by steering the burglar toward "
        "the wrong container."
    ),
    ("ckbg", "burglar"): (
        "You are the burglar. Two containers are in the room and one holds a "
        "valuable item. Question the homeowner, then end the conversation with a "
        "line of the form \"[STOP] Burglar chosed: <container>.\" naming exactly "
        "one container."
    ),
    ("mf", "player"): (
        "You and the other player each hold a list of friends with attributes. "
        "Exactly one friend appears in both lists. Exchange information to find "
        "that mutual friend. When you are certain, start a line with \"CONFIRM:\" "
        "followed by the friend's attributes."
    ),
    ("casino", "negotiator"): (
        "You are negotiating how to split 3 food, 3 water, and 3 firewood "
        "packages with your campsite neighbor. Propose and discuss splits. State "
        "your current offer for your own share on a line of the form "
        "\"DEAL: food=a, water=b, firewood=c\"."
    ),
}


def render_prompt(
    game_id: str,
    role: str,
    context: DialogueContext,
    condition_text: str,
    slots: Mapping[str, str],
    self_name: str | None = None,
) -> Prompt:
    """Role background plus the filled game template, with the dialogue
    history mapped to interlocutor/self turns."""
    if game_id not in TEMPLATES:
        raise DomainError(f"unknown game {game_id!r}")
    background = ROLE_BACKGROUNDS.get((game_id, role))
    if background is None:
        raise DomainError(f"unknown role {role!r} for game {game_id!r}")
    notice = fill_template(TEMPLATES[game_id], slots)
    system = background
    if condition_text:
        system += "\n\n" + condition_text
    system += "\n\n" + notice
    turns = []
    for speaker, text in context.turns:
        if speaker == "SYSTEM":
            turns.append(("system", text))
        elif self_name is not None and speaker == self_name:
            turns.append(("self", text))
        else:
            turns.append(("interlocutor", text))
    return Prompt(system, tuple(turns))


# ---------------------------------------------------------------------------
# Generators
# ---------------------------------------------------------------------------


class Generator:
    def generate(self, prompt: Prompt) -> Utterance:
        raise NotImplementedError


class ScriptedGenerator(Generator):
    """Pure lookup on (game, role, turn-index); the index is the number of
    self turns already in the prompt."""

    def __init__(self, game_id: str, role: str, table: Mapping[tuple[str, str, int], str]):
        self._game = game_id
        self._role = role
        self._table = dict(table)

    def generate(self, prompt: Prompt) -> Utterance:
        key = (self._game, self._role, prompt.self_turn_count())
        if key not in self._table:
            raise DomainError(f"no scripted utterance for {key}")
        return Utterance.of(self._table[key])


class SequenceGenerator(Generator):
    """Consumes a fixed list of completions in order; for wrapper tests."""

    def __init__(self, texts: Sequence[str]):
        self._texts = list(texts)
        self._cursor = 0
        self.calls = 0

    def generate(self, prompt: Prompt) -> Utterance:
        if self._cursor >= len(self._texts):
            raise DomainError("sequence generator exhausted")
        text = self._texts[self._cursor]
        self._cursor += 1
        self.calls += 1
        return Utterance.of(text)


class RemoteGenerator(Generator):
    """Chat-completion client: interlocutor turns go out as user messages,
    self turns as assistant messages."""

    def __init__(self, config: GeneratorConfig):
        if config.backend == "scripted":
            raise DomainError("remote generator needs an endpoint backend")
        self._config = config
        self._api_key = os.environ.get("GEN_API_KEY", "")

    def _messages(self, prompt: Prompt) -> list[dict]:
        role_map = {"interlocutor": "user", "self": "assistant", "system": "system"}
        messages = [{"role": "system", "content": prompt.system}]
        messages += [{"role": role_map[r], "content": t} for r, t in prompt.turns]
        return messages

    def generate(self, prompt: Prompt) -> Utterance:
        body = {
            "model": self._config.model,
            "messages": self._messages(prompt),
            "temperature": self._config.temperature,
            "max_tokens": self._config.max_turn_tokens,
        }
        headers = {"Content-Type": "application/json"}
        if self._api_key:
            headers["Authorization"] = f"Bearer {self._api_key}"
        last_error: Exception | None = None
        for _ in range(self._config.retries + 1):
            try:
                resp = requests.post(self._config.backend, json=body, headers=headers, timeout=120)
                resp.raise_for_status()
                text = resp.json()["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                continue
            if not text:
                return Utterance.of("", format_ok=False, flags=("empty_completion",))
            return Utterance.of(text)
        raise TransportError(
            f"generator unreachable after {self._config.retries + 1} attempts: {last_error}"
        )


class CotGenerator(Generator):
    def __init__(self, inner: Generator):
        self._inner = inner

    def generate(self, prompt: Prompt) -> Utterance:
        augmented = Prompt(prompt.system + "\n\n" + COT_INSTRUCTION, prompt.turns)
        completion = self._inner.generate(augmented)
        if not completion.format_ok:
            return completion
        head, sep, tail = completion.text.partition(COT_DELIMITER)
        if sep:
            return Utterance.of(tail.strip())
        return Utterance.of(completion.text, flags=("cot_delimiter_missing",))


def wrap_cot(generator: Generator) -> Generator:
    return CotGenerator(generator)


class SelfReflectGenerator(Generator):
    """Draft, critique, revise: three inner calls per emitted utterance."""

    def __init__(self, inner: Generator):
        self._inner = inner

    def generate(self, prompt: Prompt) -> Utterance:
        draft = self._inner.generate(prompt)
        critique_prompt = Prompt(
            prompt.system + "\n\n" + CRITIQUE_INSTRUCTION,
            prompt.turns + (("system", f"Draft reply: {draft.text}"),),
        )
        critique = self._inner.generate(critique_prompt)
        revise_prompt = Prompt(
            prompt.system + "\n\n" + REVISE_INSTRUCTION,
            prompt.turns
            + (
                ("system", f"Draft reply: {draft.text}"),
                ("system", f"Critique: {critique.text}"),
            ),
        )
        return self._inner.generate(revise_prompt)


def wrap_self_reflect(generator: Generator) -> Generator:
    return SelfReflectGenerator(generator)


def minddial_condition(
    self_truth: BeliefVector, opp_knows: BeliefVector, world_set: WorldSet
) -> str:
    """All belief information, one line per event, no filtering."""
    if self_truth.world_set_size != len(world_set) or opp_knows.world_set_size != len(world_set):
        raise DomainError("belief vectors do not match the world set")
    lines = []
    for event, truth, knows in zip(world_set.events, self_truth.values, opp_knows.values):
        lines.append(
            f"- {event.text} (you believe this is true with probability {truth:.2f}; "
            f"your opponent knows it with probability {knows:.2f})"
        )
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Action parsing
# ---------------------------------------------------------------------------


class ActionKind(Enum):
    UTTERANCE = "utterance"
    STOP_CHOICE = "stop_choice"
    FRIEND_PICK = "friend_pick"
    DEAL = "deal"
    FORMAT_ERROR = "format_error"


@dataclass(frozen=True)
class ParsedAction:
    kind: ActionKind
    container: str | None = None
    friend_id: int | None = None
    deal: tuple[int, int, int] | None = None


_DEAL_RE = re.compile(r"DEAL:\s*food\s*=\s*(\d+)\s*,\s*water\s*=\s*(\d+)\s*,\s*firewood\s*=\s*(\d+)", re.IGNORECASE)


def _match_friend(text: str, friends: Sequence[Mapping[str, str]]) -> list[int]:
    lowered = text.lower()
    matches = []
    for idx, friend in enumerate(friends):
        by_index = re.search(rf"friend\s*#?\s*{idx + 1}\b", lowered)
        by_attributes = all(str(v).lower() in lowered for v in friend.values())
        if by_index or by_attributes:
            matches.append(idx)
    return matches


def parse_action(
    game_id: str,
    utterance: Utterance,
    containers: Sequence[str] = (),
    friends: Sequence[Mapping[str, str]] = (),
    terminal: bool = False,
) -> ParsedAction:
    """Extract the game action; an unparseable terminal reply is a format
    error value, never an exception."""
    text = utterance.text
    if game_id == "ckbg":
        if "[STOP]" in text:
            lowered = text.lower()
            hits = [c for c in containers if c.lower() in lowered]
            if len(hits) == 1:
                return ParsedAction(ActionKind.STOP_CHOICE, container=hits[0])
            return ParsedAction(ActionKind.FORMAT_ERROR)
        if terminal:
            return ParsedAction(ActionKind.FORMAT_ERROR)
        return ParsedAction(ActionKind.UTTERANCE)
    if game_id == "mf":
        if terminal:
            matches = _match_friend(text, friends)
            if len(matches) == 1:
                return ParsedAction(ActionKind.FRIEND_PICK, friend_id=matches[0])
            return ParsedAction(ActionKind.FORMAT_ERROR)
        return ParsedAction(ActionKind.UTTERANCE)
    if game_id == "casino":
        matches = _DEAL_RE.findall(text)
        if matches:
            food, water, firewood = (int(x) for x in matches[-1])
            return ParsedAction(ActionKind.DEAL, deal=(food, water, firewood))
        if terminal:
            return ParsedAction(ActionKind.FORMAT_ERROR)
        return ParsedAction(ActionKind.UTTERANCE)
    raise DomainError(f"unknown game {game_id!r}")


def render_deal(deal: tuple[int, int, int]) -> str:
    food, water, firewood = deal
    return f"DEAL: food={food}, water={water}, firewood={firewood}"
