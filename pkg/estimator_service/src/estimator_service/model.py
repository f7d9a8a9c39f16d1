"""Deterministic logistic-regression head over hashed features.

Training is full-batch gradient descent from zero-initialized weights,
so the fitted model is a pure function of (rows, hyperparameters): the
same training file and settings always produce a byte-identical
artifact. The seed only enters through the caller's train/held-out
split, never the optimizer.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .data import DataFileError, LabeledRow
from .features import DEFAULT_DIM, featurize_batch


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


@dataclass
class LinearBeliefModel:
    weights: np.ndarray  # (dim,)
    bias: float
    dim: int
    metadata: dict

    def predict_proba(self, triples) -> np.ndarray:
        """Probabilities for (context, event, perspective) triples."""
        if not triples:
            return np.zeros(0)
        X = featurize_batch(triples, self.dim)
        return _sigmoid(X @ self.weights + self.bias)

    def accuracy(self, rows: Sequence[LabeledRow]) -> float:
        probs = self.predict_proba([(r.context, r.event, r.perspective) for r in rows])
        predicted = probs >= 0.5
        truth = np.array([r.label for r in rows])
        return float(np.mean(predicted == truth))

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            np.savez(
                fh,
                weights=self.weights,
                bias=np.float64(self.bias),
                dim=np.int64(self.dim),
                metadata=np.frombuffer(
                    json.dumps(self.metadata, sort_keys=True).encode(), dtype=np.uint8
                ),
            )

    @staticmethod
    def load(path) -> "LinearBeliefModel":
        with np.load(path) as doc:
            return LinearBeliefModel(
                weights=doc["weights"],
                bias=float(doc["bias"]),
                dim=int(doc["dim"]),
                metadata=json.loads(bytes(doc["metadata"]).decode()),
            )


def train(
    rows: Sequence[LabeledRow],
    dim: int = DEFAULT_DIM,
    epochs: int = 1500,
    learning_rate: float = 4.0,
    l2: float = 1e-6,
) -> LinearBeliefModel:
    labels = {row.label for row in rows}
    if labels != {True, False}:
        raise DataFileError(
            "training data must contain both labels; a single-class fit would "
            "be a constant classifier"
        )
    X = featurize_batch([(r.context, r.event, r.perspective) for r in rows], dim)
    y = np.array([1.0 if r.label else 0.0 for r in rows])
    w = np.zeros(dim)
    b = 0.0
    n = len(rows)
    for _ in range(epochs):
        p = _sigmoid(X @ w + b)
        grad_w = X.T @ (p - y) / n + l2 * w
        grad_b = float(np.mean(p - y))
        w -= learning_rate * grad_w
        b -= learning_rate * grad_b
    fingerprint = hashlib.sha256(
        "\n".join(r.to_json() for r in rows).encode()
    ).hexdigest()[:16]
    metadata = {
        "dim": dim,
        "epochs": epochs,
        "learning_rate": learning_rate,
        "l2": l2,
        "n_examples": n,
        "data_fingerprint": fingerprint,
        "train_accuracy": None,
    }
    model = LinearBeliefModel(w, b, dim, metadata)
    metadata["train_accuracy"] = model.accuracy(rows)
    return model
