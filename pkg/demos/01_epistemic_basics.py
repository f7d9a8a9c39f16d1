"""
Partition models, knowledge, and feasible speech acts
=====================================================

A walk through the epistemic core: build a two-agent partition model,
ask who knows what, and enumerate which events can be told truthfully
while keeping (or breaking) the listener's ignorance.
"""

from beda import (
    ActKind,
    PartitionModel,
    TwoAgentModel,
    act_feasible,
    feasible_events_bruteforce,
    knowledge_operator,
    knows_at,
    probability,
)

# Four states: the watch is in the box or the jar, and the keeper either
# lies or not. Agent A (the keeper) distinguishes everything; agent B
# (the burglar) only distinguishes whether the keeper lies.
states = ("box_lie", "box_honest", "jar_lie", "jar_honest")
partition_a = tuple(frozenset({s}) for s in states)
partition_b = (frozenset({"box_lie", "jar_lie"}), frozenset({"box_honest", "jar_honest"}))
prior = {"box_lie": 0.4, "box_honest": 0.2, "jar_lie": 0.3, "jar_honest": 0.1}

model = TwoAgentModel(states, partition_a, partition_b, prior)

# The event "the watch is in the box".
in_box = frozenset({"box_lie", "box_honest"})
print("P_A(watch in box) =", probability(PartitionModel(states, partition_a, prior), in_box))

# B's knowledge operator: B can never know where the watch is, because
# each of B's cells mixes box-states with jar-states.
b_view = model.as_agent_b()
print("K_B(watch in box) =", sorted(knowledge_operator(b_view, in_box)))
print("B knows it at box_lie?", knows_at(b_view, "box_lie", in_box))

# An adversarial act tells something A believes true that B will still
# not come to know; an alignment act tells something B will know.
print("adversarial feasible:", act_feasible(model, in_box, ActKind.ADVERSARIAL, 0.5))
print("alignment feasible:  ", act_feasible(model, in_box, ActKind.ALIGNMENT, 0.5))

# Enumerate every feasible event at eps = 0.3 for both act kinds.
for act in ActKind:
    events = feasible_events_bruteforce(model, act, 0.3)
    print(f"{act.value}: {len(events)} feasible events, e.g.",
          [sorted(e) for e in events[:3]])
