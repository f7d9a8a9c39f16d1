"""
From dialogue context to a conditioned prompt
=============================================

The full per-turn pipeline of a keeper agent, step by step: estimate
beliefs over the world events, filter them through the adversarial
constraint, and render the conditioning block into the notice template.
"""

from beda import (
    ActConstraint,
    ActKind,
    ALL,
    DialogueContext,
    OracleEstimator,
    Perspective,
    choose,
    compose_condition,
    feasible_set,
    render_prompt,
)
from beda.games import ckbg_generate_dataset, ckbg_world_events
from beda.games.ckbg import burglar_known_events, keeper_task, keeper_true_events

# One generated game setting: two containers, a valuable, and a handful
# of conditions split between keeper and burglar.
setting = ckbg_generate_dataset(1, 3, seed=4)[0][0]
world = ckbg_world_events(setting)
print("world events:")
for event in world.events:
    print(f"  [{event.id}] {event.text}")

# Oracle beliefs: the keeper knows its own truths and, here, guesses the
# burglar's knowledge perfectly.
oracle = OracleEstimator({
    Perspective.SELF_TRUTH: keeper_true_events(setting),
    Perspective.OPPONENT_KNOWS: burglar_known_events(setting),
})
context = DialogueContext(task=keeper_task(setting)).with_turn(
    setting.burglar_name, "Where is it hidden?"
)
self_truth = oracle.estimate(context, world, Perspective.SELF_TRUTH)
opp_knows = oracle.estimate(context, world, Perspective.OPPONENT_KNOWS)

# Adversarial filtering: true for the keeper, unknowable for the burglar.
feasible = feasible_set(self_truth, opp_knows, ActConstraint(ActKind.ADVERSARIAL, 0.5))
result = choose(feasible, ALL, seed=0)
print("\nfeasible event ids:", sorted(result.feasible))

# The chosen events become the keeper's belief-state block in the prompt.
machine_u = compose_condition(result.chosen, world, "ckbg")
user_u = compose_condition(sorted(opp_knows.known_set()), world, "ckbg")
prompt = render_prompt(
    "ckbg", "keeper", context, "",
    {"context": "two containers in a room", "user_U": user_u,
     "machine_U": machine_u, "task": keeper_task(setting)},
    self_name=setting.keeper_name,
)
print("\nsystem prompt:\n" + prompt.system)
