"""Standalone belief-estimation service.

Serves per-event probabilities over the JSON estimation protocol:
POST {context, events, perspective} -> {probabilities}. The model is a
hashed bag-of-words featurizer with a logistic-regression head, trained
deterministically so a (file, seed) pair always yields a byte-identical
model artifact.
"""

from .features import DEFAULT_DIM, SEPARATOR, encode, featurize
from .model import LinearBeliefModel, train
from .data import (
    LabeledRow,
    make_synthetic_dataset,
    read_rows,
    split_rows,
    write_rows,
)
from .service import create_app

__all__ = [
    "DEFAULT_DIM",
    "SEPARATOR",
    "LabeledRow",
    "LinearBeliefModel",
    "create_app",
    "encode",
    "featurize",
    "make_synthetic_dataset",
    "read_rows",
    "split_rows",
    "train",
    "write_rows",
]
__version__ = "0.1.0"
