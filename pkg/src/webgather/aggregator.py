"""The aggregator: stack curation and feedback generation.

Decisions come back from the model as JSON with "thoughts", "actions",
and "feedback". Action strings follow a two-verb grammar::

    ADD(provided_id)
    REPLACE(existing_id, provided_id)

Unknown verbs are dropped with a trace warning; a response with no
parseable JSON or missing keys is a MalformedDecision. Applying actions
is total and deterministic: anything that would overflow the stack,
duplicate a (text, source_url) pair, or index out of range is skipped
with a warning, never raised. The stack a caller gets back is never
smaller than the one it passed in.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .backends.model import ModelBackend
from .core import Feedback, InfoStack, Passage, RunConfig, Task, TraceRecorder
from .errors import MalformedDecision
from .jsontools import extract_json_object
from .prompts import render_passage_list, render_template

#: Feedback text when a page yielded nothing; the model is not consulted.
NO_RELEVANT_INFO_TEXT = (
    "The page contained no relevant information; try a different source or query."
)

#: Feedback text when the decision stayed unparseable after the retry.
PARSE_FAILURE_TEXT = (
    "The aggregator could not parse its last decision; continue gathering "
    "information."
)

CORRECTIVE_SUFFIX = (
    "\n\nYour previous response could not be parsed. Respond with only the JSON "
    "object in the format given above."
)

_ADD_RE = re.compile(r"^\s*ADD\s*\(\s*(\d+)\s*\)\s*$")
_REPLACE_RE = re.compile(r"^\s*REPLACE\s*\(\s*(\d+)\s*,\s*(\d+)\s*\)\s*$")
_TERMINATE_WORD_RE = re.compile(r"\bterminate\b", re.IGNORECASE)


@dataclass(frozen=True)
class StackAction:
    """One parsed stack edit."""

    verb: str
    provided_id: int
    existing_id: int | None = None

    def __post_init__(self) -> None:
        if self.verb not in ("ADD", "REPLACE"):
            raise ValueError(f"verb must be ADD or REPLACE, got {self.verb!r}")
        if self.verb == "REPLACE" and self.existing_id is None:
            raise ValueError("REPLACE requires an existing_id")

    def render(self) -> str:
        if self.verb == "ADD":
            return f"ADD({self.provided_id})"
        return f"REPLACE({self.existing_id}, {self.provided_id})"


@dataclass(frozen=True)
class AggregatorDecision:
    thoughts: str
    actions: tuple[StackAction, ...]
    feedback_text: str

    def __post_init__(self) -> None:
        if not self.feedback_text.strip():
            raise ValueError("feedback_text must be non-empty")


def parse_action_string(text: str) -> StackAction | None:
    """One grammar item, or None when the string matches neither verb."""
    match = _ADD_RE.match(text)
    if match:
        return StackAction(verb="ADD", provided_id=int(match.group(1)))
    match = _REPLACE_RE.match(text)
    if match:
        return StackAction(
            verb="REPLACE",
            existing_id=int(match.group(1)),
            provided_id=int(match.group(2)),
        )
    return None


def parse_decision(
    raw: str, trace: TraceRecorder | None = None, t: int = 0
) -> AggregatorDecision:
    """Parse model output into a decision.

    The first balanced JSON object wins even when wrapped in prose or a
    code fence. Raises MalformedDecision when no object parses or a
    required key is missing; unparseable action strings are dropped with
    a trace warning rather than failing the whole decision.
    """
    parsed = extract_json_object(raw)
    if parsed is None:
        raise MalformedDecision(f"no JSON object in aggregator output: {raw[:200]!r}")
    missing = [key for key in ("thoughts", "actions", "feedback") if key not in parsed]
    if missing:
        raise MalformedDecision(f"aggregator output is missing keys: {missing}")
    feedback_text = str(parsed["feedback"])
    if not feedback_text.strip():
        raise MalformedDecision("aggregator feedback must be non-empty")
    raw_actions = parsed["actions"]
    if not isinstance(raw_actions, list):
        raise MalformedDecision("aggregator 'actions' must be a list")
    actions: list[StackAction] = []
    for item in raw_actions:
        action = parse_action_string(item) if isinstance(item, str) else None
        if action is not None:
            actions.append(action)
        elif trace is not None:
            trace.emit(
                t,
                "aggregator",
                "action_dropped",
                {"action": repr(item)[:200]},
                outcome="skipped",
            )
    return AggregatorDecision(
        thoughts=str(parsed["thoughts"]),
        actions=tuple(actions),
        feedback_text=feedback_text,
    )


def apply_actions(
    stack: InfoStack,
    provided: Sequence[Passage],
    actions: Sequence[StackAction],
    trace: TraceRecorder | None = None,
    t: int = 0,
) -> InfoStack:
    """Apply actions left to right; every invalid action is skipped.

    Skip reasons: an id out of range, an ADD that would overflow the
    stack, or any edit that would duplicate a (text, source_url) pair.
    """

    def skip(action: StackAction, reason: str) -> None:
        if trace is not None:
            trace.emit(
                t,
                "aggregator",
                "action_skipped",
                {"action": action.render(), "reason": reason},
                outcome="skipped",
            )

    current = stack
    for action in actions:
        if not 0 <= action.provided_id < len(provided):
            skip(action, "provided_id out of range")
            continue
        passage = provided[action.provided_id]
        if action.verb == "ADD":
            if current.is_full:
                skip(action, "stack at capacity")
            elif passage.key in current.keys():
                skip(action, "duplicate passage")
            else:
                current = current.with_added(passage)
        else:
            existing_id = action.existing_id or 0
            if not 0 <= existing_id < len(current):
                skip(action, "existing_id out of range")
                continue
            other_keys = current.keys() - {current.items[existing_id].key}
            if passage.key in other_keys:
                skip(action, "duplicate passage")
            else:
                current = current.with_replaced(existing_id, passage)
    return current


def update(
    stack: InfoStack,
    provided: Sequence[Passage],
    task: Task,
    *,
    aggregations_done: int,
    config: RunConfig,
    backend: ModelBackend,
    trace: TraceRecorder | None = None,
    t: int = 0,
) -> tuple[InfoStack, Feedback]:
    """One aggregation round: curate the stack and produce feedback.

    With an empty ``provided`` list the model is skipped entirely and the
    navigator is told the page had nothing. ``aggregations_done`` is the
    count before this round; ``iterations_remaining`` in the returned
    feedback is budget minus that count. ``terminate_requested`` is set
    when the feedback contains the word "terminate" or this round spends
    the last slot of the aggregation budget.
    """
    budget = config.max_aggregations
    remaining = max(budget - aggregations_done, 0)
    if not provided:
        if trace is not None:
            trace.emit(
                t,
                "aggregator",
                "update",
                {"provided": 0, "model_skipped": True, "stack_size": len(stack)},
            )
        return stack, Feedback(NO_RELEVANT_INFO_TEXT, remaining, False)

    template = "aggregator_visual" if task.access_mode == "visual" else "aggregator_api"
    prompt = render_template(
        template,
        num_to_aggregate=config.capacity,
        num_iterations=budget,
        counter=aggregations_done,
        user_task=task.query,
        aggregated_list=render_passage_list(stack),
        provided_list=render_passage_list(provided),
    )
    model = config.model_for("aggregator")
    decision: AggregatorDecision | None = None
    raw = backend.complete(prompt, model=model, response_mode="json")
    try:
        decision = parse_decision(raw, trace, t)
    except MalformedDecision:
        raw = backend.complete(
            prompt + CORRECTIVE_SUFFIX, model=model, response_mode="json"
        )
        try:
            decision = parse_decision(raw, trace, t)
        except MalformedDecision as exc:
            if trace is not None:
                trace.emit(
                    t,
                    "aggregator",
                    "update",
                    {"provided": len(provided), "stack_size": len(stack)},
                    outcome="error",
                    error_detail=str(exc),
                )
            return stack, Feedback(PARSE_FAILURE_TEXT, remaining, False)

    new_stack = apply_actions(stack, provided, decision.actions, trace, t)
    terminate = (
        _TERMINATE_WORD_RE.search(decision.feedback_text) is not None
        or aggregations_done + 1 >= budget
    )
    if trace is not None:
        trace.emit(
            t,
            "aggregator",
            "update",
            {
                "provided": len(provided),
                "actions": [a.render() for a in decision.actions],
                "stack_size": len(new_stack),
                "feedback": decision.feedback_text,
                "terminate_requested": terminate,
            },
        )
    return new_stack, Feedback(decision.feedback_text, remaining, terminate)
