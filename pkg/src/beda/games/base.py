"""Shared episode machinery: outcomes, transcript entries, agent surface."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..beliefs import DialogueContext
from ..generation import Utterance


@dataclass
class EpisodeOutcome:
    game_id: str
    success: bool | None = None
    agreement: bool | None = None
    rewards: dict[str, int] | None = None
    turns: int = 0
    tokens_by_side: dict[str, int] = field(default_factory=dict)
    format_error: bool = False
    fallback_count: int = 0
    chosen_container: str | None = None
    picks: dict[str, int | None] | None = None

    def total_tokens(self) -> int:
        return sum(self.tokens_by_side.values())

    def to_dict(self) -> dict:
        return {
            "game_id": self.game_id,
            "success": self.success,
            "agreement": self.agreement,
            "rewards": self.rewards,
            "turns": self.turns,
            "tokens_by_side": dict(self.tokens_by_side),
            "format_error": self.format_error,
            "fallback_count": self.fallback_count,
            "chosen_container": self.chosen_container,
            "picks": dict(self.picks) if self.picks else None,
        }

    @staticmethod
    def from_dict(doc: Mapping) -> "EpisodeOutcome":
        return EpisodeOutcome(
            game_id=doc["game_id"],
            success=doc.get("success"),
            agreement=doc.get("agreement"),
            rewards=doc.get("rewards"),
            turns=doc.get("turns", 0),
            tokens_by_side=dict(doc.get("tokens_by_side", {})),
            format_error=doc.get("format_error", False),
            fallback_count=doc.get("fallback_count", 0),
            chosen_container=doc.get("chosen_container"),
            picks=doc.get("picks"),
        )


class DialogueAgent:
    """One side of an episode. ``respond`` sees the running context and
    returns the utterance plus a log entry (prompts, selections, vectors)."""

    name: str = ""

    def respond(
        self, context: DialogueContext, episode_seed: int, turn_index: int
    ) -> tuple[Utterance, dict]:
        raise NotImplementedError


class ScriptedAgent(DialogueAgent):
    """Replays a fixed list of utterances; turn arithmetic is the caller's."""

    def __init__(self, name: str, lines: Sequence[str]):
        self.name = name
        self._lines = list(lines)
        self._cursor = 0

    def respond(self, context, episode_seed, turn_index):
        if self._cursor >= len(self._lines):
            text = self._lines[-1] if self._lines else ""
        else:
            text = self._lines[self._cursor]
        self._cursor += 1
        return Utterance.of(text), {"scripted": True}
