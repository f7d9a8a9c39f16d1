from collections import Counter

import pytest
from hypothesis import given, strategies as st

from beda.beliefs import BeliefVector, Event, Perspective, WorldSet
from beda.epistemic import ActKind
from beda.errors import DomainError
from beda.selection import (
    ALL,
    CASINO_WORLD_SIZE,
    FALLBACK_MARKER,
    UNIFORM_ONE,
    ActConstraint,
    SelectionPolicy,
    choose,
    compose_condition,
    feasible_set,
    mixed_select,
    uniform_k,
)


def vec(perspective, values):
    return BeliefVector(perspective, tuple(values), len(values))


def truth(values):
    return vec(Perspective.SELF_TRUTH, values)


def knows(values):
    return vec(Perspective.OPPONENT_KNOWS, values)


def test_constraint_validation():
    with pytest.raises(DomainError):
        ActConstraint(ActKind.ADVERSARIAL, 1.0)
    with pytest.raises(DomainError):
        ActConstraint(ActKind.ADVERSARIAL, -0.01)
    with pytest.raises(DomainError):
        SelectionPolicy("weighted")
    with pytest.raises(DomainError):
        uniform_k(0)


def test_feasible_set_adversarial_and_alignment():
    t = truth([1.0, 1.0, 0.0, 1.0])
    k = knows([0.0, 1.0, 0.0, 0.4])
    adv = feasible_set(t, k, ActConstraint(ActKind.ADVERSARIAL, 0.5))
    ali = feasible_set(t, k, ActConstraint(ActKind.ALIGNMENT, 0.5))
    # Adversarial needs truth >= 0.5 and (1 - knows) >= 0.5; event 2 fails
    # truth, event 1 is already known to the opponent.
    assert adv == frozenset({0, 3})
    assert ali == frozenset({1})


def test_feasible_set_boundary_non_strict():
    t = truth([0.5])
    k = knows([0.5])
    assert feasible_set(t, k, ActConstraint(ActKind.ALIGNMENT, 0.5)) == frozenset({0})
    assert feasible_set(t, k, ActConstraint(ActKind.ADVERSARIAL, 0.5)) == frozenset({0})


def test_feasible_set_perspective_checks():
    t = truth([1.0])
    k = knows([1.0])
    c = ActConstraint(ActKind.ALIGNMENT, 0.5)
    with pytest.raises(DomainError):
        feasible_set(k, k, c)
    with pytest.raises(DomainError):
        feasible_set(t, t, c)
    with pytest.raises(DomainError):
        feasible_set(t, knows([1.0, 1.0]), c)


@given(st.lists(st.sampled_from([0.0, 0.3, 0.5, 0.8, 1.0]), min_size=1, max_size=12), st.data())
def test_adversarial_alignment_disjoint_below_half(values, data):
    t = truth([1.0] * len(values))
    k = knows(values)
    eps = data.draw(st.sampled_from([0.1, 0.3, 0.49]))
    adv = feasible_set(t, k, ActConstraint(ActKind.ADVERSARIAL, eps))
    ali = feasible_set(t, k, ActConstraint(ActKind.ALIGNMENT, eps))
    assert not (adv & ali)


def test_choose_all_and_fallback():
    res = choose({3, 1, 2}, ALL)
    assert res.chosen == (1, 2, 3)
    assert not res.fallback
    empty = choose(frozenset(), ALL)
    assert empty.fallback and empty.chosen == ()


def test_choose_uniform_one_deterministic_per_seed():
    feasible = {0, 1, 2, 3}
    assert choose(feasible, UNIFORM_ONE, seed=9).chosen == choose(feasible, UNIFORM_ONE, seed=9).chosen
    seen = {choose(feasible, UNIFORM_ONE, seed=s).chosen[0] for s in range(50)}
    assert seen == feasible


def test_choose_uniform_k():
    res = choose({0, 1, 2, 3, 4}, uniform_k(3), seed=1)
    assert len(res.chosen) == 3
    assert len(set(res.chosen)) == 3
    # k larger than the feasible set degrades to all of it.
    assert sorted(choose({0, 1}, uniform_k(5), seed=1).chosen) == [0, 1]


def test_choose_uniform_one_frequencies():
    counts = Counter(choose({0, 1, 2, 3}, UNIFORM_ONE, seed=s).chosen[0] for s in range(8000))
    for c in counts.values():
        assert abs(c / 8000 - 0.25) < 0.03


# ---------------------------------------------------------------------------
# Mixed selection
# ---------------------------------------------------------------------------


def casino_vectors(true_assertive, opp_known):
    t = [0.0] * CASINO_WORLD_SIZE
    k = [0.0] * CASINO_WORLD_SIZE
    for i in true_assertive:
        t[i] = 1.0
        t[i + 12] = 0.0
    # Negated twins of false assertive events are true.
    for i in range(12):
        if t[i] == 0.0:
            t[i + 12] = 1.0
    for i in opp_known:
        k[i] = 1.0
    return truth(t), knows(k)


def test_mixed_select_draws_both_halves():
    t, k = casino_vectors(true_assertive=[2, 5], opp_known=[2, 17])
    res = mixed_select(t, k, 0.5, seed=4)
    assert res.alignment == 2  # true and known, assertive half
    assert res.adversarial in range(12, 24)
    assert not res.alignment_fallback and not res.adversarial_fallback


def test_mixed_select_fallbacks_independent():
    # Opponent knows nothing: alignment empty, adversarial still available.
    t, k = casino_vectors(true_assertive=[1], opp_known=[])
    res = mixed_select(t, k, 0.5)
    assert res.alignment is None and res.alignment_fallback
    assert res.adversarial is not None
    # Opponent knows everything: adversarial empty.
    t2, k2 = casino_vectors(true_assertive=[1], opp_known=list(range(24)))
    res2 = mixed_select(t2, k2, 0.5)
    assert res2.adversarial is None and res2.adversarial_fallback
    assert res2.alignment == 1


def test_mixed_select_requires_full_world():
    with pytest.raises(DomainError):
        mixed_select(truth([1.0]), knows([1.0]), 0.5)


def test_mixed_select_deterministic():
    t, k = casino_vectors(true_assertive=[0, 3, 7], opp_known=[0, 3, 7, 13, 20])
    a = mixed_select(t, k, 0.5, seed=11)
    b = mixed_select(t, k, 0.5, seed=11)
    assert a == b


# ---------------------------------------------------------------------------
# Condition rendering
# ---------------------------------------------------------------------------


def mf_world():
    return WorldSet(
        (
            Event(0, "s0", {"attribute": "School", "value": "Kent"}),
            Event(1, "s1", {"attribute": "Major", "value": "Art"}),
        )
    )


def test_compose_condition_templates():
    ws = WorldSet((Event(0, "first fact."), Event(1, "second fact.")))
    assert compose_condition([0, 1], ws, "ckbg") == "- first fact.\n- second fact."
    assert compose_condition([1], ws, "casino") == "second fact."
    assert compose_condition([0, 1], mf_world(), "mf") == "School: Kent; Major: Art"


def test_compose_condition_fallback_and_errors():
    ws = WorldSet((Event(0, "x"),))
    for template in ("ckbg", "mf", "casino"):
        assert compose_condition([], ws, template) == FALLBACK_MARKER
    with pytest.raises(DomainError):
        compose_condition([4], ws, "ckbg")
    with pytest.raises(DomainError):
        compose_condition([0], ws, "haiku")


@given(st.sets(st.integers(0, 5), max_size=6), st.sets(st.integers(0, 5), max_size=6))
def test_distinct_selections_render_distinctly(a, b):
    ws = WorldSet(tuple(Event(i, f"unique fact number {i}.") for i in range(6)))
    if a != b:
        assert compose_condition(sorted(a), ws, "ckbg") != compose_condition(sorted(b), ws, "ckbg")
