"""Training-data IO and a synthetic separable corpus for self-tests.

Rows use the labeled-example wire shape shared with the experiment
framework: {"context", "event", "perspective", "label"} per JSONL line.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Iterable, Sequence

PERSPECTIVES = ("self_truth", "opponent_knows")


class DataFileError(ValueError):
    pass


@dataclass(frozen=True)
class LabeledRow:
    context: str
    event: str
    perspective: str
    label: bool

    def to_json(self) -> str:
        return json.dumps(
            {
                "context": self.context,
                "event": self.event,
                "perspective": self.perspective,
                "label": self.label,
            },
            ensure_ascii=False,
        )


def read_rows(path) -> list[LabeledRow]:
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                doc = json.loads(line)
                row = LabeledRow(
                    context=doc["context"],
                    event=doc["event"],
                    perspective=doc["perspective"],
                    label=bool(doc["label"]),
                )
            except (ValueError, KeyError) as exc:
                raise DataFileError(f"{path}:{lineno}: malformed row: {exc}") from exc
            if row.perspective not in PERSPECTIVES:
                raise DataFileError(f"{path}:{lineno}: unknown perspective {row.perspective!r}")
            rows.append(row)
    if not rows:
        raise DataFileError(f"{path}: no rows")
    return rows


def write_rows(rows: Iterable[LabeledRow], path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(row.to_json() + "\n")


def split_rows(rows: Sequence[LabeledRow], held_out: float, seed: int):
    """Deterministic shuffle-and-split into (train, held-out)."""
    if not 0 < held_out < 1:
        raise ValueError("held_out fraction must be in (0, 1)")
    order = list(range(len(rows)))
    random.Random(seed).shuffle(order)
    cut = max(1, int(len(rows) * held_out))
    held = [rows[i] for i in order[:cut]]
    train = [rows[i] for i in order[cut:]]
    if not train:
        raise DataFileError("split leaves no training rows")
    return train, held


_ATTRIBUTES = ("School", "Major", "Hobby")
_VALUES = {
    "School": ("Kent State", "University of Redlands", "Carleton", "Fordham"),
    "Major": ("Art History", "Linguistics", "Marine Biology", "Economics"),
    "Hobby": ("rock climbing", "calligraphy", "beekeeping", "speed chess"),
}


def make_synthetic_dataset(n: int, seed: int = 0) -> list[LabeledRow]:
    """Linearly separable triples: the label is true iff the event's
    attribute value actually appears in the context."""
    if n < 2:
        raise ValueError("n must be >= 2")
    rng = random.Random(seed)
    rows = []
    for i in range(n):
        attribute = rng.choice(_ATTRIBUTES)
        value = rng.choice(_VALUES[attribute])
        speaker = rng.choice(("Bob", "Alex"))
        label = i % 2 == 0
        mentioned = value if label else rng.choice(
            [v for v in _VALUES[attribute] if v != value]
        )
        context = (
            f"{speaker}: I think the {attribute.lower()} might be {mentioned}.\n"
            f"Other: Interesting, tell me more."
        )
        event = f"The friend's {attribute} is {value}."
        rows.append(LabeledRow(context, event, rng.choice(PERSPECTIVES), label))
    return rows
