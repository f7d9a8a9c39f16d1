"""World sets, belief vectors, and the pluggable belief estimators.

An estimator maps a dialogue context and a world set to one probability
per event, from one of two perspectives: the speaker's own truth
judgement, or the speaker's prediction of what the interlocutor knows.
"""

from __future__ import annotations

import hashlib
import json
import random
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Iterable, Mapping, Sequence

import requests

from .errors import DataError, DomainError, ProtocolError, TransportError

KNOWN_THRESHOLD = 0.5  # ties count as known
DEFAULT_CLIP_RANGE = (0, 1, 2, 3)


class Perspective(Enum):
    SELF_TRUTH = "self_truth"
    OPPONENT_KNOWS = "opponent_knows"


@dataclass(frozen=True)
class Event:
    id: int
    text: str
    payload: Mapping[str, str] = field(default_factory=dict)

    def __post_init__(self):
        if not self.text:
            raise DomainError("event text must be non-empty")


@dataclass(frozen=True)
class WorldSet:
    events: tuple[Event, ...]

    def __post_init__(self):
        object.__setattr__(self, "events", tuple(self.events))
        if not self.events:
            raise DomainError("world set must be non-empty")
        if [e.id for e in self.events] != list(range(len(self.events))):
            raise DomainError("event ids must be 0..n-1 in order")

    def __len__(self) -> int:
        return len(self.events)

    def texts(self) -> list[str]:
        return [e.text for e in self.events]


@dataclass(frozen=True)
class BeliefVector:
    perspective: Perspective
    values: tuple[float, ...]
    world_set_size: int

    def __post_init__(self):
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        if len(self.values) != self.world_set_size:
            raise DomainError("belief vector length must equal the world-set size")
        if any(not 0.0 <= v <= 1.0 for v in self.values):
            raise DomainError("belief values must lie in [0, 1]")

    def known_set(self, threshold: float = KNOWN_THRESHOLD) -> frozenset[int]:
        return frozenset(i for i, v in enumerate(self.values) if v >= threshold)


@dataclass(frozen=True)
class DialogueContext:
    task: str
    background: str = ""
    turns: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "turns", tuple((s, u) for s, u in self.turns))

    def with_turn(self, speaker: str, utterance: str) -> "DialogueContext":
        return DialogueContext(self.task, self.background, self.turns + ((speaker, utterance),))

    def clipped(self, drop_final: int) -> "DialogueContext":
        turns = self.turns[: len(self.turns) - drop_final] if drop_final else self.turns
        return DialogueContext(self.task, self.background, turns)

    def render(self) -> str:
        """Newline-joined "Speaker: utterance" lines; the estimator wire format."""
        return "\n".join(f"{speaker}: {utterance}" for speaker, utterance in self.turns)


@dataclass(frozen=True)
class LabeledExample:
    context: str
    event: str
    perspective: Perspective
    label: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "context": self.context,
                "event": self.event,
                "perspective": self.perspective.value,
                "label": self.label,
            },
            ensure_ascii=False,
        )

    @staticmethod
    def from_json(line: str) -> "LabeledExample":
        doc = json.loads(line)
        return LabeledExample(
            context=doc["context"],
            event=doc["event"],
            perspective=Perspective(doc["perspective"]),
            label=bool(doc["label"]),
        )


# ---------------------------------------------------------------------------
# Estimators
# ---------------------------------------------------------------------------


def oracle_estimate(
    ground_truth: Iterable[int], world_set: WorldSet, perspective: Perspective
) -> BeliefVector:
    """Indicator vector of the ground-truth event set: the perfect estimator."""
    truth = set(ground_truth)
    unknown = truth - set(range(len(world_set)))
    if unknown:
        raise DomainError(f"unknown event ids {sorted(unknown)}")
    values = tuple(1.0 if i in truth else 0.0 for i in range(len(world_set)))
    return BeliefVector(perspective, values, len(world_set))


def random_estimate(seed: int, world_set: WorldSet, perspective: Perspective = Perspective.SELF_TRUTH) -> BeliefVector:
    """Independent fair-coin 0/1 beliefs, reproducible from the seed."""
    rng = random.Random(seed)
    values = tuple(1.0 if rng.random() < 0.5 else 0.0 for _ in range(len(world_set)))
    return BeliefVector(perspective, values, len(world_set))


_WORD_DIGITS = {
    "zero": "0", "one": "1", "two": "2", "three": "3", "four": "4",
    "five": "5", "six": "6", "seven": "7", "eight": "8", "nine": "9",
    "ten": "10", "eleven": "11", "twelve": "12",
}


def _content_tokens(text: str) -> set[str]:
    tokens = re.findall(r"[a-z0-9']+", text.lower())
    return {_WORD_DIGITS.get(t, t) for t in tokens}


def keyword_estimate(
    context: DialogueContext,
    world_set: WorldSet,
    perspective: Perspective = Perspective.OPPONENT_KNOWS,
    threshold: float = 0.5,
) -> BeliefVector:
    """Token-overlap heuristic: an event counts as believed once more than
    ``threshold`` of its content tokens have surfaced in the dialogue.

    Appending turns can only grow the dialogue token set, so scores are
    monotone in the context.
    """
    spoken = _content_tokens(" ".join(u for _, u in context.turns))
    values = []
    for event in world_set.events:
        event_tokens = _content_tokens(event.text + " " + " ".join(map(str, event.payload.values())))
        score = len(event_tokens & spoken) / len(event_tokens) if event_tokens else 0.0
        values.append(1.0 if score > threshold else 0.0)
    return BeliefVector(perspective, tuple(values), len(world_set))


@dataclass(frozen=True)
class EstimatorClientConfig:
    endpoint: str
    retries: int = 3
    timeout: float = 10.0


def remote_estimate(
    config: EstimatorClientConfig,
    context: DialogueContext,
    world_set: WorldSet,
    perspective: Perspective,
) -> BeliefVector:
    """Query the estimation service; validates length and range of the reply."""
    payload = {
        "context": context.render(),
        "events": world_set.texts(),
        "perspective": perspective.value,
    }
    last_error: Exception | None = None
    for _ in range(config.retries):
        try:
            resp = requests.post(config.endpoint, json=payload, timeout=config.timeout)
        except requests.RequestException as exc:
            last_error = exc
            continue
        if resp.status_code != 200:
            raise ProtocolError(f"estimator service returned HTTP {resp.status_code}: {resp.text[:200]}")
        try:
            probs = resp.json()["probabilities"]
        except (ValueError, KeyError) as exc:
            raise ProtocolError(f"malformed estimator response: {exc}") from exc
        if len(probs) != len(world_set):
            raise ProtocolError(
                f"estimator returned {len(probs)} probabilities for {len(world_set)} events"
            )
        if any(not 0.0 <= p <= 1.0 for p in probs):
            raise ProtocolError("estimator probability outside [0, 1]")
        return BeliefVector(perspective, tuple(probs), len(world_set))
    raise TransportError(f"estimator unreachable after {config.retries} attempts: {last_error}")


class Estimator:
    """Uniform call surface over the concrete estimators."""

    def estimate(
        self, context: DialogueContext, world_set: WorldSet, perspective: Perspective
    ) -> BeliefVector:
        raise NotImplementedError


class OracleEstimator(Estimator):
    def __init__(self, truth_by_perspective: Mapping[Perspective, Iterable[int]]):
        self._truth = {p: frozenset(ids) for p, ids in truth_by_perspective.items()}

    def estimate(self, context, world_set, perspective):
        if perspective not in self._truth:
            raise DomainError(f"no ground truth configured for {perspective}")
        return oracle_estimate(self._truth[perspective], world_set, perspective)


class RandomEstimator(Estimator):
    """Fresh coin flips per distinct (context, perspective); stable across reruns."""

    def __init__(self, seed: int):
        self._seed = seed

    def estimate(self, context, world_set, perspective):
        material = f"{self._seed}|{perspective.value}|{context.render()}"
        call_seed = int.from_bytes(hashlib.sha256(material.encode()).digest()[:8], "big")
        return random_estimate(call_seed, world_set, perspective)


class KeywordEstimator(Estimator):
    def __init__(self, threshold: float = 0.5):
        self._threshold = threshold

    def estimate(self, context, world_set, perspective):
        return keyword_estimate(context, world_set, perspective, self._threshold)


class RemoteEstimator(Estimator):
    def __init__(self, config: EstimatorClientConfig):
        self._config = config

    def estimate(self, context, world_set, perspective):
        return remote_estimate(self._config, context, world_set, perspective)


# ---------------------------------------------------------------------------
# Training data and evaluation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GroundTruthTranscript:
    """One finished episode with per-event, per-perspective ground truth."""

    context: DialogueContext
    world_set: WorldSet
    truth: Mapping[Perspective, frozenset[int]]
    triple_style: bool = False  # attribute/value events eligible for corruption

    def to_dict(self) -> dict:
        return {
            "context": {
                "task": self.context.task,
                "background": self.context.background,
                "turns": [list(t) for t in self.context.turns],
            },
            "events": [
                {"id": e.id, "text": e.text, "payload": dict(e.payload)}
                for e in self.world_set.events
            ],
            "truth": {p.value: sorted(ids) for p, ids in self.truth.items()},
            "triple_style": self.triple_style,
        }

    @staticmethod
    def from_dict(doc: Mapping) -> "GroundTruthTranscript":
        ctx = doc["context"]
        return GroundTruthTranscript(
            context=DialogueContext(
                ctx.get("task", ""), ctx.get("background", ""), tuple(tuple(t) for t in ctx["turns"])
            ),
            world_set=WorldSet(
                tuple(Event(e["id"], e["text"], e.get("payload", {})) for e in doc["events"])
            ),
            truth={Perspective(p): frozenset(ids) for p, ids in doc["truth"].items()},
            triple_style=doc.get("triple_style", False),
        )


def _corrupt_triple(event: Event, world_set: WorldSet, rng: random.Random) -> Event:
    """Swap either the attribute or the value for another one seen in the world set."""
    attributes = sorted({e.payload["attribute"] for e in world_set.events if "attribute" in e.payload})
    values = sorted({e.payload["value"] for e in world_set.events if "value" in e.payload})
    payload = dict(event.payload)
    flip_attribute = rng.random() < 0.5
    pool = [a for a in attributes if a != payload["attribute"]] if flip_attribute else \
        [v for v in values if v != payload["value"]]
    if not pool:
        flip_attribute = not flip_attribute
        pool = [a for a in attributes if a != payload["attribute"]] if flip_attribute else \
            [v for v in values if v != payload["value"]]
    if not pool:
        raise DataError("world set too small to corrupt a triple")
    key = "attribute" if flip_attribute else "value"
    payload[key] = rng.choice(pool)
    text = re.sub(re.escape(event.payload[key]), payload[key], event.text, count=1)
    return Event(event.id, text, payload)


def emit_training_data(
    transcripts: Sequence[GroundTruthTranscript],
    clip_range: Sequence[int] = DEFAULT_CLIP_RANGE,
    negative_ratio: int = 1,
    seed: int = 0,
) -> list[LabeledExample]:
    """Clip each transcript's tail and pair it with event labels.

    Triple-style transcripts additionally spawn ``negative_ratio`` corrupted
    copies of every positive triple, labeled false. Output order is a pure
    function of the inputs and the seed.
    """
    if negative_ratio < 0:
        raise DomainError("negative_ratio must be >= 0")
    rng = random.Random(seed)
    out: list[LabeledExample] = []
    for idx, transcript in enumerate(transcripts):
        if not transcript.truth:
            raise DataError(f"transcript {idx} carries no ground truth")
        drop = rng.choice(list(clip_range))
        drop = min(drop, len(transcript.context.turns))
        context_text = transcript.context.clipped(drop).render()
        for perspective, truth_ids in sorted(transcript.truth.items(), key=lambda kv: kv[0].value):
            for event in transcript.world_set.events:
                label = event.id in truth_ids
                out.append(LabeledExample(context_text, event.text, perspective, label))
                if label and transcript.triple_style:
                    for _ in range(negative_ratio):
                        corrupted = _corrupt_triple(event, transcript.world_set, rng)
                        out.append(LabeledExample(context_text, corrupted.text, perspective, False))
    return out


def write_training_file(examples: Iterable[LabeledExample], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for ex in examples:
            fh.write(ex.to_json() + "\n")


def read_training_file(path) -> list[LabeledExample]:
    examples = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                examples.append(LabeledExample.from_json(line))
            except (ValueError, KeyError) as exc:
                raise DataError(f"{path}:{lineno}: malformed example: {exc}") from exc
    return examples


def context_from_text(text: str, task: str = "", background: str = "") -> DialogueContext:
    """Rebuild a DialogueContext from its rendered "Speaker: utterance" form."""
    turns = []
    for line in text.splitlines():
        speaker, sep, utterance = line.partition(": ")
        turns.append((speaker, utterance) if sep else ("SYSTEM", line))
    return DialogueContext(task, background, tuple(turns))


class EvalMode(Enum):
    BINARY = "binary"
    PAIRWISE = "pairwise"


def pairwise_accuracy(predicted: Sequence[str], truth: Sequence[str]) -> float:
    """Fraction of the three resource pairs ordered the same way in both rankings."""
    if sorted(predicted) != sorted(truth):
        raise DomainError("permutations must rank the same items")
    items = sorted(truth)
    correct = 0
    pairs = [(a, b) for i, a in enumerate(items) for b in items[i + 1 :]]
    for a, b in pairs:
        if (list(predicted).index(a) < list(predicted).index(b)) == (
            list(truth).index(a) < list(truth).index(b)
        ):
            correct += 1
    return correct / len(pairs)


def evaluate_estimator(
    estimator: Estimator | Callable[[LabeledExample], float],
    labeled_set: Sequence[LabeledExample],
    mode: EvalMode = EvalMode.BINARY,
    pairwise_pairs: Sequence[tuple[Sequence[str], Sequence[str]]] | None = None,
) -> dict:
    """Accuracy report at the 0.5 threshold (binary) or over resource pairs.

    In PAIRWISE mode the caller supplies (predicted, truth) permutation pairs;
    the labeled set is unused there.
    """
    if mode is EvalMode.PAIRWISE:
        if not pairwise_pairs:
            raise DomainError("PAIRWISE mode needs permutation pairs")
        scores = [pairwise_accuracy(p, t) for p, t in pairwise_pairs]
        return {"mode": mode.value, "n": len(scores), "accuracy": sum(scores) / len(scores)}

    if not labeled_set:
        raise DomainError("labeled set must be non-empty")
    correct = 0
    for example in labeled_set:
        if isinstance(estimator, Estimator):
            context = context_from_text(example.context)
            world_set = WorldSet((Event(0, example.event),))
            prob = estimator.estimate(context, world_set, example.perspective).values[0]
        else:
            prob = estimator(example)
        predicted = prob >= KNOWN_THRESHOLD
        correct += predicted == example.label
    return {"mode": mode.value, "n": len(labeled_set), "accuracy": correct / len(labeled_set)}


def belief_gap(predicted: BeliefVector, truth: Iterable[int]) -> int:
    """Size of the symmetric difference between predicted-known events and truth."""
    truth = frozenset(truth)
    out_of_range = truth - set(range(predicted.world_set_size))
    if out_of_range:
        raise DomainError(f"truth ids {sorted(out_of_range)} outside the world set")
    return len(predicted.known_set() ^ truth)
