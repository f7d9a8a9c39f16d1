"""Acceptance gate: one test per top-level criterion, each printing a
single PASS/FAIL line. Oracles here are computed independently of the
library code paths they check (bit-mask arithmetic vs. set algebra)."""

import itertools
import json
import random
import time
from collections import Counter
from pathlib import Path

import numpy as np
import pytest

from beda.beliefs import BeliefVector, Perspective, belief_gap, pairwise_accuracy
from beda.epistemic import (
    ActKind,
    PartitionModel,
    TwoAgentModel,
    act_feasible,
    feasible_events_bruteforce,
    knowledge_operator,
)
from beda.errors import DomainError
from beda.games import casino_world_set, ckbg_generate_dataset, EpisodeOutcome
from beda.generation import CASINO_TEMPLATE, CKBG_TEMPLATE, MF_TEMPLATE
from beda.harness import (
    EpisodeRecord,
    ExperimentConfig,
    compute_metrics,
    load_records,
    replay_episode,
    run_experiment,
)
from beda.selection import UNIFORM_ONE, ActConstraint, choose, feasible_set

GOLDEN = Path(__file__).parent / "golden"


def report(name: str, ok: bool, detail: str = ""):
    line = f"[{'PASS' if ok else 'FAIL'}] {name}"
    if detail:
        line += f" ({detail})"
    print(line)
    assert ok, line


def random_partition_masks(n: int, rng: random.Random) -> list[int]:
    """Random information partition over n states as cell bit-masks."""
    labels = [rng.randrange(n) for _ in range(n)]
    cells: dict[int, int] = {}
    for i, lab in enumerate(labels):
        cells[lab] = cells.get(lab, 0) | (1 << i)
    return list(cells.values())


def masks_to_partition(n: int, masks: list[int]):
    states = tuple(f"w{i}" for i in range(n))
    cells = tuple(frozenset(states[i] for i in range(n) if m >> i & 1) for m in masks)
    return states, cells


def test_criterion_1_knowledge_operator_axioms():
    """Exhaustive axiom check over every event of 100 random partitions."""
    start = time.monotonic()
    rng = random.Random(20240817)
    for trial in range(100):
        n = rng.randint(1, 8)
        masks = random_partition_masks(n, rng)
        size = 1 << n
        # Independent oracle: K(E) as a union of contained cell masks.
        K = np.zeros(size, dtype=np.int64)
        for m in range(size):
            acc = 0
            for cm in masks:
                if m & cm == cm:
                    acc |= cm
            K[m] = acc
        full = size - 1
        events = np.arange(size, dtype=np.int64)
        assert np.all(K & events == K)            # truth: K(E) subset of E
        assert np.all(K[K] == K)                  # idempotence
        assert K[full] == full                    # K(W) = W
        inter = events[:, None] & events[None, :]
        assert np.all(K[inter] == (K[:, None] & K[None, :]))  # distribution
        # Distribution over pairs implies monotonicity: E subset of F means
        # E & F == E, so K(E) == K(E) & K(F) which is K(E) subset of K(F).

        # Tie the oracle to the library on sampled events.
        states, cells = masks_to_partition(n, masks)
        prior = {s: 1.0 / n for s in states}
        model = PartitionModel(states, cells, prior)
        for _ in range(10):
            m = rng.randrange(size)
            event = frozenset(states[i] for i in range(n) if m >> i & 1)
            lib = knowledge_operator(model, event)
            lib_mask = sum(1 << int(s[1:]) for s in lib)
            assert lib_mask == K[m]
    elapsed = time.monotonic() - start
    report("knowledge-operator axioms (100 random partitions, |W|<=8, exhaustive)",
           elapsed < 5.0, f"{elapsed:.2f}s")


def test_criterion_2_feasibility_enumeration_matches_oracle():
    """Brute-force enumeration equals an independent per-subset check."""
    start = time.monotonic()
    rng = random.Random(99)
    for trial in range(1000):
        n = rng.randint(2, 10)
        states = tuple(f"w{i}" for i in range(n))
        masks_a = random_partition_masks(n, rng)
        masks_b = random_partition_masks(n, rng)
        weights = [rng.random() + 0.01 for _ in range(n)]
        total = sum(weights)
        prior = {s: w / total for s, w in zip(states, weights)}
        prior[states[0]] += 1.0 - sum(prior.values())
        model = TwoAgentModel(
            states,
            masks_to_partition(n, masks_a)[1],
            masks_to_partition(n, masks_b)[1],
            prior,
        )
        act = rng.choice(list(ActKind))
        epsilon = rng.choice([0.2, 0.5, 0.8])
        got = set(feasible_events_bruteforce(model, act, epsilon))
        expected = set()
        for r in range(n + 1):
            for combo in itertools.combinations(states, r):
                event = frozenset(combo)
                if act_feasible(model, event, act, epsilon):
                    expected.add(event)
        assert got == expected
    elapsed = time.monotonic() - start
    report("feasible-event enumeration equals per-event oracle (1000 random models)",
           elapsed < 30.0, f"{elapsed:.2f}s")


def test_criterion_3_acts_mutually_exclusive_below_half():
    """For epsilon < 0.5 no event is both adversarial- and alignment-feasible."""
    rng = random.Random(7)
    violations = 0
    for _ in range(10000):
        size = rng.randint(1, 24)
        t = BeliefVector(
            Perspective.SELF_TRUTH, tuple(rng.random() for _ in range(size)), size
        )
        k = BeliefVector(
            Perspective.OPPONENT_KNOWS, tuple(rng.random() for _ in range(size)), size
        )
        eps = rng.choice([0.1, 0.3, 0.49])
        adv = feasible_set(t, k, ActConstraint(ActKind.ADVERSARIAL, eps))
        ali = feasible_set(t, k, ActConstraint(ActKind.ALIGNMENT, eps))
        violations += bool(adv & ali)
    report("adversarial/alignment mutually exclusive for eps<0.5 (10000 vector pairs)",
           violations == 0, f"{violations} violations")


def test_criterion_4_uniform_selection_frequencies():
    """Uniform single-event choice is empirically uniform."""
    feasible = frozenset({2, 5, 9, 13})
    counts = Counter(
        choose(feasible, UNIFORM_ONE, seed=s).chosen[0] for s in range(40000)
    )
    freqs = {e: counts[e] / 40000 for e in feasible}
    ok = all(abs(f - 0.25) <= 0.01 for f in freqs.values())
    report("uniform event choice frequencies 0.25 +/- 0.01 over 40000 draws",
           ok, ", ".join(f"{e}:{f:.3f}" for e, f in sorted(freqs.items())))


def test_criterion_5_worked_keeper_example():
    """The eight-event worked example: the keeper holds all events true,
    the burglar knows events 1,4,5,7 (1-indexed), so the adversarial set
    is exactly events 2,3,6,8; a two-event prediction misses by 2."""
    truth = BeliefVector(Perspective.SELF_TRUTH, (1.0,) * 8, 8)
    burglar_known_1idx = {1, 4, 5, 7}
    knows = BeliefVector(
        Perspective.OPPONENT_KNOWS,
        tuple(1.0 if (i + 1) in burglar_known_1idx else 0.0 for i in range(8)),
        8,
    )
    adv = feasible_set(truth, knows, ActConstraint(ActKind.ADVERSARIAL, 0.5))
    selected_1idx = {i + 1 for i in adv}
    predicted = BeliefVector(
        Perspective.OPPONENT_KNOWS,
        tuple(1.0 if (i + 1) in {1, 4} else 0.0 for i in range(8)),
        8,
    )
    gap = belief_gap(predicted, {i - 1 for i in burglar_known_1idx})
    ok = selected_1idx == {2, 3, 6, 8} and gap == 2
    report("worked keeper example: selection {2,3,6,8}, belief gap 2",
           ok, f"selected={sorted(selected_1idx)}, gap={gap}")


def test_criterion_6_dataset_statistics():
    """Fixed condition counts are exact; weighted counts hit the target mean."""
    _, summary = ckbg_generate_dataset(150, 3, seed=11)
    exact_ok = summary.conditions == 450 and summary.avg_conditions == 3.0
    weights = {1: 0.1, 2: 0.4, 3: 0.36, 4: 0.14}  # expectation 2.54
    means = []
    for seed in range(10):
        _, s = ckbg_generate_dataset(400, weights, seed=seed)
        means.append(s.avg_conditions)
    mean = sum(means) / len(means)
    weighted_ok = abs(mean - 2.54) <= 0.15
    report("dataset statistics: 150x3 -> 450 conditions; weighted mean 2.54 +/- 0.15",
           exact_ok and weighted_ok, f"exact={summary.conditions}, weighted mean={mean:.3f}")


def test_criterion_7_prompt_templates_frozen():
    """The three notice templates match their golden bytes, including the
    mutual-friends template's original phrasing."""
    ok = (
        CKBG_TEMPLATE.encode() == (GOLDEN / "ckbg_template.txt").read_bytes()
        and MF_TEMPLATE.encode() == (GOLDEN / "mf_template.txt").read_bytes()
        and CASINO_TEMPLATE.encode() == (GOLDEN / "casino_template.txt").read_bytes()
        and "whether there a friend in your friend list that meet" in MF_TEMPLATE
    )
    report("prompt templates byte-identical to golden files", ok)


def _record(game, idx, status="ok", success=None, turns=0, tokens=0, agreement=None, rewards=None):
    outcome = EpisodeOutcome(
        game_id=game, success=success, agreement=agreement, rewards=rewards,
        turns=turns, tokens_by_side={"A": tokens}, format_error=status == "format_error",
    )
    return EpisodeRecord("fp", game, 0, idx, idx, status, outcome, [])


def test_criterion_8_metric_fixtures():
    """Hand-computed metric values, including format-error exclusion."""
    mf = compute_metrics([
        _record("mf", 0, success=True, turns=8, tokens=300),
        _record("mf", 1, success=False, turns=12, tokens=500),
    ]).per_repetition[0]
    mf_ok = (
        mf["success_rate"] == 50.0 and mf["avg_turns"] == 10 and mf["sr_per_turn"] == 5.0
        and mf["avg_tokens"] == 400 and mf["sr_per_token"] == 0.125
    )
    casino = compute_metrics([
        _record("casino", 0, agreement=True, rewards={"A": 12, "B": 18}, turns=2),
        _record("casino", 1, agreement=True, rewards={"A": 20, "B": 22}, turns=4),
        _record("casino", 2, agreement=False, turns=12),
    ]).per_repetition[0]
    casino_ok = (
        casino["agreement_rate"] == pytest.approx(2 / 3)
        and casino["mean_agreement_reward"] == pytest.approx(18.0)
    )
    excl = compute_metrics([
        _record("mf", 0, success=True, turns=4, tokens=100),
        _record("mf", 1, success=False, turns=6, tokens=200),
        _record("mf", 2, status="format_error", success=False, turns=2, tokens=999),
    ]).per_repetition[0]
    excl_ok = excl["n_valid"] == 2 and excl["success_rate"] == 50.0 and excl["avg_turns"] == 5
    report("metric fixtures: MF and negotiation values; format errors excluded "
           "from numerator and denominator", mf_ok and casino_ok and excl_ok)


def test_criterion_9_end_to_end_determinism(tmp_path):
    """Identical config and seed give byte-identical record files; a single
    episode replays to the same transcript."""
    paths = [tmp_path / "a.jsonl", tmp_path / "b.jsonl"]
    for path in paths:
        cfg = ExperimentConfig(game="mf", n_episodes=20, repetitions=1, seed=123,
                               output_path=str(path))
        run_experiment(cfg)
    identical = paths[0].read_bytes() == paths[1].read_bytes()
    cfg = ExperimentConfig(game="mf", n_episodes=20, repetitions=1, seed=123,
                           output_path=str(paths[0]))
    records = load_records(paths[0])
    replayed = replay_episode(cfg, records[7])
    replay_ok = replayed.to_dict() == records[7].to_dict()
    report("end-to-end determinism: byte-identical records and faithful replay",
           identical and replay_ok)


def test_criterion_10_negotiation_world_and_pairwise_scores():
    """24 preference events split 12/12 by polarity; the pairwise score of
    each permutation against a fixed truth takes the six expected values."""
    ws = casino_world_set("Negotiator 1", "Negotiator 2")
    polarity = [e.payload["polarity"] for e in ws.events]
    shape_ok = len(ws) == 24 and polarity.count("is") == 12 and polarity.count("isn't") == 12
    truth = ("water", "firewood", "food")
    scores = sorted(
        pairwise_accuracy(p, truth) for p in itertools.permutations(truth)
    )
    expected = sorted([1.0, 2 / 3, 2 / 3, 1 / 3, 1 / 3, 0.0])
    scores_ok = all(abs(a - b) < 1e-12 for a, b in zip(scores, expected))
    report("negotiation world set 24 events (12 assertive / 12 negated); "
           "pairwise score multiset {0, 1/3, 1/3, 2/3, 2/3, 1}",
           shape_ok and scores_ok)


def test_criterion_11_keeper_conditions_are_private_knowledge():
    """Across 200 seeded scripted episodes with oracle beliefs, the keeper's
    condition block is exactly what it holds true minus what the burglar
    already knows."""
    from beda.games.ckbg import burglar_known_events, keeper_true_events

    checked = 0
    for seed in range(20):
        cfg = ExperimentConfig(game="ckbg", n_episodes=10, repetitions=1, seed=seed)
        settings, _ = ckbg_generate_dataset(10, 3, seed=seed)
        _, records = run_experiment(cfg)
        for record, setting in zip(records, settings):
            expected = sorted(keeper_true_events(setting) - burglar_known_events(setting))
            keeper_turns = [t for t in record.transcript if "chosen" in t]
            for turn in keeper_turns:
                assert turn["chosen"] == expected
            checked += 1
    report("keeper condition block equals its private true events (200 episodes)",
           checked == 200, f"{checked} episodes checked")


def test_criterion_errors_are_domain_errors():
    """Constraint-domain violations surface as typed errors, not asserts."""
    with pytest.raises(DomainError):
        ActConstraint(ActKind.ADVERSARIAL, 1.0)
    with pytest.raises(DomainError):
        BeliefVector(Perspective.SELF_TRUTH, (2.0,), 1)
    report("invalid constraint and belief inputs raise typed domain errors", True)
