"""Partition-semantics beliefs over a finite state space.

States are opaque string identifiers; events are frozensets of states.
Everything here is immutable and pure, so values can be shared freely
across threads or processes.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

from .errors import CapacityError, DomainError

PRIOR_TOLERANCE = 1e-9
BRUTEFORCE_MAX_STATES = 16


class ActKind(Enum):
    ADVERSARIAL = "adversarial"
    ALIGNMENT = "alignment"


def _check_partition(states: tuple[str, ...], partition: tuple[frozenset[str], ...]) -> None:
    if not states:
        raise DomainError("state space must be non-empty")
    if len(set(states)) != len(states):
        raise DomainError("duplicate state identifiers")
    seen: set[str] = set()
    for cell in partition:
        if not cell:
            raise DomainError("empty partition cell")
        if cell & seen:
            raise DomainError(f"partition cells overlap on {sorted(cell & seen)}")
        seen |= cell
    if seen != set(states):
        raise DomainError("partition cells do not cover the state space")


def _check_prior(states: tuple[str, ...], prior: Mapping[str, float]) -> None:
    if set(prior) != set(states):
        raise DomainError("prior must assign a probability to every state")
    if any(p < 0 for p in prior.values()):
        raise DomainError("negative prior probability")
    total = sum(prior.values())
    if abs(total - 1.0) > PRIOR_TOLERANCE:
        raise DomainError(f"prior sums to {total!r}, not 1")


@dataclass(frozen=True)
class PartitionModel:
    """A finite state space with one agent's information partition and prior."""

    states: tuple[str, ...]
    partition: tuple[frozenset[str], ...]
    prior: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "partition", tuple(frozenset(c) for c in self.partition))
        _check_partition(self.states, self.partition)
        _check_prior(self.states, self.prior)


@dataclass(frozen=True)
class TwoAgentModel:
    """A shared state space with per-agent partitions and A's subjective prior."""

    states: tuple[str, ...]
    partition_a: tuple[frozenset[str], ...]
    partition_b: tuple[frozenset[str], ...]
    prior_a: Mapping[str, float]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "partition_a", tuple(frozenset(c) for c in self.partition_a))
        object.__setattr__(self, "partition_b", tuple(frozenset(c) for c in self.partition_b))
        _check_partition(self.states, self.partition_a)
        _check_partition(self.states, self.partition_b)
        _check_prior(self.states, self.prior_a)

    def as_agent_b(self) -> PartitionModel:
        """B's partition viewed through A's prior (the only prior the theory uses)."""
        return PartitionModel(self.states, self.partition_b, self.prior_a)


def _check_event(model, event: frozenset[str]) -> frozenset[str]:
    event = frozenset(event)
    unknown = event - set(model.states)
    if unknown:
        raise DomainError(f"event contains unknown states {sorted(unknown)}")
    return event


def cell_of(model: PartitionModel, state: str) -> frozenset[str]:
    """The partition cell I(x) containing ``state``."""
    for cell in model.partition:
        if state in cell:
            return cell
    raise DomainError(f"unknown state {state!r}")


def knows_at(model: PartitionModel, state: str, event: Iterable[str]) -> bool:
    """True iff the agent knows ``event`` at ``state``: I(x) is contained in it."""
    event = _check_event(model, frozenset(event))
    return cell_of(model, state) <= event


def knowledge_operator(model: PartitionModel, event: Iterable[str]) -> frozenset[str]:
    """K(E): the union of partition cells fully contained in the event."""
    event = _check_event(model, frozenset(event))
    result: frozenset[str] = frozenset()
    for cell in model.partition:
        if cell <= event:
            result |= cell
    return result


def negate(model, event: Iterable[str]) -> frozenset[str]:
    """Set complement within the state space."""
    event = _check_event(model, frozenset(event))
    return frozenset(model.states) - event


def probability(model: PartitionModel, event: Iterable[str]) -> float:
    """Prior mass of the event."""
    event = _check_event(model, frozenset(event))
    return sum(model.prior[x] for x in event)


def _probability_a(model: TwoAgentModel, event: frozenset[str]) -> float:
    return sum(model.prior_a[x] for x in event)


def act_feasible(
    model: TwoAgentModel,
    event: Iterable[str],
    act: ActKind,
    epsilon: float,
) -> bool:
    """Whether telling ``event`` is an epsilon-feasible act from A to B.

    Adversarial requires P_A(E) >= 1-eps and P_A(not K_B E) >= 1-eps;
    alignment swaps the second constraint for P_A(K_B E) >= 1-eps.
    Comparisons are non-strict.
    """
    if not 0 <= epsilon < 1:
        raise DomainError(f"epsilon must be in [0, 1), got {epsilon!r}")
    event = _check_event(model, frozenset(event))
    threshold = 1.0 - epsilon
    if _probability_a(model, event) < threshold:
        return False
    model_b = model.as_agent_b()
    kb = knowledge_operator(model_b, event)
    if act is ActKind.ADVERSARIAL:
        return _probability_a(model, negate(model, kb)) >= threshold
    return _probability_a(model, kb) >= threshold


def feasible_events_bruteforce(
    model: TwoAgentModel,
    act: ActKind,
    epsilon: float,
) -> list[frozenset[str]]:
    """Every subset of W passing ``act_feasible``, in canonical bit-order.

    Bit i of the enumeration mask corresponds to states[i]. Guarded to
    |W| <= 16 so the full 2^|W| sweep stays sub-second.
    """
    if not 0 <= epsilon < 1:
        raise DomainError(f"epsilon must be in [0, 1), got {epsilon!r}")
    n = len(model.states)
    if n > BRUTEFORCE_MAX_STATES:
        raise CapacityError(f"brute force limited to {BRUTEFORCE_MAX_STATES} states, got {n}")

    index = {s: i for i, s in enumerate(model.states)}
    cell_masks = []
    for cell in model.partition_b:
        m = 0
        for s in cell:
            m |= 1 << index[s]
        cell_masks.append(m)

    # Subset-sum DP: prob[m] is A's prior mass of the states in mask m.
    prob = [0.0] * (1 << n)
    for m in range(1, 1 << n):
        low = m & -m
        prob[m] = prob[m ^ low] + model.prior_a[model.states[low.bit_length() - 1]]

    threshold = 1.0 - epsilon
    full = (1 << n) - 1
    out: list[frozenset[str]] = []
    for m in range(1 << n):
        if prob[m] < threshold:
            continue
        kb = 0
        for cm in cell_masks:
            if m & cm == cm:
                kb |= cm
        second = prob[full ^ kb] if act is ActKind.ADVERSARIAL else prob[kb]
        if second >= threshold:
            out.append(frozenset(model.states[i] for i in range(n) if m >> i & 1))
    return out
