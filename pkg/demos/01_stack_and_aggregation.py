"""The information stack and the aggregator, step by step.

The stack is the run's working memory: a bounded, ordered list of
passages. The aggregator curates it with ADD and REPLACE actions and
answers every round with natural-language feedback for the navigator.
This script drives both by hand, with a scripted model standing in for
the LLM, so every decision is visible.

Run from the repository root:

    python3 demos/01_stack_and_aggregation.py
"""

from __future__ import annotations

import json

from webgather import (
    InfoStack,
    Passage,
    RunConfig,
    ScriptedModelBackend,
    Task,
    TraceRecorder,
    apply_actions,
    update,
)
from webgather.aggregator import StackAction

TITAN = "https://miniwiki.example/titan"
HUYGENS = "https://miniwiki.example/huygens"


def show(stack: InfoStack, label: str) -> None:
    print(f"\n{label} (size {len(stack)}, capacity {stack.capacity}):")
    for i, passage in enumerate(stack):
        print(f"  [{i}] {passage.text}  <- {passage.source_url}")
    if len(stack) == 0:
        print("  (empty)")


# --- 1. Direct stack edits -------------------------------------------------

print("Part 1: the stack is bounded and duplicate-free")

stack = InfoStack(capacity=2)
discovered = Passage(
    text="Titan was discovered by Christiaan Huygens in 1655.",
    source_url=TITAN,
    step_extracted=1,
)
born = Passage(
    text="Christiaan Huygens was born in The Hague.",
    source_url=HUYGENS,
    step_extracted=2,
)
clock = Passage(
    text="Huygens invented the pendulum clock in 1656.",
    source_url=HUYGENS,
    step_extracted=3,
)

trace = TraceRecorder()
stack = apply_actions(stack, [discovered], [StackAction("ADD", 0)], trace, 1)
stack = apply_actions(stack, [born], [StackAction("ADD", 0)], trace, 2)
show(stack, "after two ADDs")

# the stack is full now; an ADD is skipped, a REPLACE still works
stack = apply_actions(stack, [clock], [StackAction("ADD", 0)], trace, 3)
show(stack, "after an ADD at capacity (skipped)")
stack = apply_actions(
    stack, [clock], [StackAction("REPLACE", 0, existing_id=1)], trace, 4
)
show(stack, "after REPLACE(1, 0)")

print("\nskipped actions are traced, never fatal:")
for event in trace.events:
    if event.kind == "action_skipped":
        print(f"  t={event.t} skipped {event.payload['action']}:"
              f" {event.payload['reason']}")

# --- 2. One aggregator round ------------------------------------------------

print("\nPart 2: one aggregator round with model-made decisions")

task = Task(id="demo", query="What did the discoverer of Titan invent?")
config = RunConfig(capacity=2)

# the scripted backend answers with the aggregator's decision JSON
decision = json.dumps({
    "thoughts": "The invention fact answers the task; the birthplace does not.",
    "actions": ["REPLACE(0, 0)"],
    "feedback": "The stack now has the discovery and the invention. "
                "That answers the task. You can terminate.",
})
backend = ScriptedModelBackend([decision])

fresh = InfoStack(capacity=2)
fresh = fresh.with_added(born)
fresh = fresh.with_added(discovered)
show(fresh, "stack before the round")

new_stack, feedback = update(
    fresh,
    [clock],                 # what the extractor pulled from the page
    task,
    aggregations_done=1,
    config=config,
    backend=backend,
)
show(new_stack, "stack after the round")
print(f"\nfeedback to the navigator: {feedback.text}")
print(f"iterations remaining: {feedback.iterations_remaining}")
print(f"termination requested: {feedback.terminate_requested}")

# --- 3. The empty-handed round ----------------------------------------------

print("\nPart 3: an empty extraction skips the model entirely")

idle_backend = ScriptedModelBackend([])  # would raise if ever called
same_stack, feedback = update(
    new_stack, [], task, aggregations_done=2, config=config, backend=idle_backend
)
print(f"stack object unchanged: {same_stack is new_stack}")
print(f"feedback: {feedback.text}")
