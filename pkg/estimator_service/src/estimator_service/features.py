"""Hashed bag-of-words features over (context, event, perspective) inputs.

Three token families share one hashed space, distinguished by a prefix:
``c:`` context tokens, ``e:`` event tokens, and ``b:`` tokens occurring
in both — the overlap family is what lets a linear head express "the
event's content has actually surfaced in the dialogue". Token positions
come from sha256, so the feature map is stable across processes and
platforms (no dependence on PYTHONHASHSEED).
"""

from __future__ import annotations

import hashlib
import re

import numpy as np

DEFAULT_DIM = 4096
SEPARATOR = "[SEP]"

_TOKEN = re.compile(r"[a-z0-9']+")


def encode(context: str, event: str, perspective: str) -> str:
    """Canonical single-string form of one estimation input."""
    return f"{context} {SEPARATOR} {event} {SEPARATOR} {perspective}"


def _index(token: str, dim: int) -> int:
    digest = hashlib.sha256(token.encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big") % dim


def _tokens(text: str) -> list[str]:
    return _TOKEN.findall(text.lower())


def featurize(context: str, event: str, perspective: str, dim: int = DEFAULT_DIM) -> np.ndarray:
    if dim < 2:
        raise ValueError(f"feature dimension must be >= 2, got {dim}")
    x = np.zeros(dim, dtype=np.float64)
    context_tokens = _tokens(context)
    event_tokens = _tokens(event)
    for token in context_tokens:
        x[_index("c:" + token, dim)] += 1.0
    for token in event_tokens:
        x[_index("e:" + token, dim)] += 1.0
    for token in set(context_tokens) & set(event_tokens):
        x[_index("b:" + token, dim)] += 2.0
    x[_index("p:" + perspective, dim)] += 1.0
    norm = np.linalg.norm(x)
    if norm > 0:
        x /= norm
    return x


def featurize_batch(triples, dim: int = DEFAULT_DIM) -> np.ndarray:
    """Feature matrix for (context, event, perspective) triples."""
    if not triples:
        return np.zeros((0, dim))
    return np.stack([featurize(c, e, p, dim) for c, e, p in triples])
