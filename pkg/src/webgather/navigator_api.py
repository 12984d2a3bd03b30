"""Navigator for the direct API-driven setting.

A reasoning-then-tool-call loop: each turn the model sees the task, the
full action/observation history, and the latest aggregator feedback, and
answers with one JSON tool call::

    {"thought": "...", "tool": "search" | "aggregate" | "terminate", "argument": "..."}

Two rules are hard-enforced in code, not just prompted: an AGGREGATE url
must come from the most recent search results, and a url can never be
aggregated twice. A violation earns one corrective re-ask (with a
synthetic observation naming the problem); repeating the same violation
in one turn ends the run with TERMINATE. Output with no JSON object at
all is read as a plain terminating message.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

from .backends.model import ModelBackend
from .backends.search import SearchResult
from .core import ApiNavAction, Feedback, Task, TraceRecorder
from .jsontools import extract_json_object
from .prompts import render_template

TOOL_NAMES = ("search", "aggregate", "terminate")

SNIPPET_DIGEST_CHARS = 60

NO_RESULTS_DIGEST = "no results; revise the query"
REPEATED_RESULTS_NOTE = (
    " (identical results to the previous search; consider a different query)"
)

TOOL_INSTRUCTIONS = """\
Respond with a single JSON object describing your next tool call and ensure it can be parsed by Python json.loads.
Response Format:
{
"thought": your reasoning for the next step,
"tool": one of "search", "aggregate", "terminate",
"argument": the search query for "search", the url to read for "aggregate", or a closing message for "terminate"
}
The "aggregate" url must come from the most recent search results and must not have been visited before."""


@dataclass(frozen=True)
class HistoryEntry:
    """One past navigator turn: what was done and what came back."""

    action: str
    observation: str


@dataclass(frozen=True)
class ApiNavState:
    """Everything the api navigator conditions on, immutably."""

    task: Task
    feedback: Feedback
    history: tuple[HistoryEntry, ...] = ()
    last_results: tuple[SearchResult, ...] = ()
    visited: frozenset[str] = frozenset()


def observe_search(
    state: ApiNavState,
    query: str,
    results: list[SearchResult],
    error: str | None = None,
) -> ApiNavState:
    """Fold one search outcome into the state.

    The observation digest lists urls with trimmed snippets, flags empty
    result sets, and flags a result set identical to the previous one so
    the model notices it is repeating itself.
    """
    if error is not None:
        digest = f"search failed ({error}); revise the query"
    elif not results:
        digest = NO_RESULTS_DIGEST
    else:
        parts = []
        for result in results:
            snippet = result.snippet[:SNIPPET_DIGEST_CHARS]
            parts.append(f"{result.url} - {snippet}")
        digest = f"{len(results)} results: " + "; ".join(parts)
        if tuple(results) == state.last_results:
            digest += REPEATED_RESULTS_NOTE
    entry = HistoryEntry(action=f"SEARCH({query!r})", observation=digest)
    return replace(
        state, history=state.history + (entry,), last_results=tuple(results)
    )


def record_aggregate(state: ApiNavState, url: str, feedback: Feedback) -> ApiNavState:
    """Fold one aggregation into the state.

    The page context is deliberately untouched: last_results stay as they
    were, and the only change besides history is marking the url visited.
    """
    entry = HistoryEntry(action=f"AGGREGATE({url!r})", observation=feedback.text)
    return replace(
        state,
        feedback=feedback,
        history=state.history + (entry,),
        visited=state.visited | {url},
    )


def record_terminate(state: ApiNavState, message: str) -> ApiNavState:
    entry = HistoryEntry(action="TERMINATE", observation=message)
    return replace(state, history=state.history + (entry,))


def serialize_history(
    history: tuple[HistoryEntry, ...],
    max_chars: int,
    trace: TraceRecorder | None = None,
    t: int = 0,
) -> str:
    """History as Action/Observation lines, oldest entries dropped first
    when the budget is exceeded (the drop is traced)."""
    entries = list(history)
    if not entries:
        return "(none yet)"

    def rendered(items: list[HistoryEntry]) -> str:
        return "\n".join(
            f"Action: {e.action}\nObservation: {e.observation}" for e in items
        )

    dropped = 0
    text = rendered(entries)
    while len(text) > max_chars and len(entries) > 1:
        entries.pop(0)
        dropped += 1
        text = rendered(entries)
    if dropped:
        if trace is not None:
            trace.emit(
                t,
                "navigator",
                "history_truncated",
                {"dropped": dropped, "kept": len(entries)},
            )
        text = f"(earlier history truncated: {dropped} entries dropped)\n" + text
    return text


def build_prompt(
    state: ApiNavState,
    max_history_chars: int = 24000,
    extra_observations: list[str] | None = None,
    trace: TraceRecorder | None = None,
    t: int = 0,
) -> str:
    sections = [
        render_template("navigator_api", user_task=state.task.query),
        "Previous actions and observations:\n"
        + serialize_history(state.history, max_history_chars, trace, t),
        "Aggregator feedback: " + state.feedback.text,
    ]
    for observation in extra_observations or []:
        sections.append("Observation: " + observation)
    sections.append(TOOL_INSTRUCTIONS)
    return "\n\n".join(sections)


def parse_tool_call(raw: str) -> dict | None:
    """Pure tool-call parse; never raises.

    Returns {"thought", "tool", "argument"} with the tool lowercased, or
    None when the output has no JSON object or no recognizable tool.
    """
    parsed = extract_json_object(raw)
    if parsed is None:
        return None
    tool = parsed.get("tool")
    if not isinstance(tool, str) or tool.strip().lower() not in TOOL_NAMES:
        return None
    argument = parsed.get("argument", "")
    if not isinstance(argument, str):
        argument = json.dumps(argument) if argument is not None else ""
    thought = parsed.get("thought", "")
    return {
        "thought": str(thought),
        "tool": tool.strip().lower(),
        "argument": argument,
    }


def _plain_message(raw: str) -> str:
    message = " ".join(raw.split())
    return message[:400] if message else "aggregation is done"


def next_action(
    state: ApiNavState,
    backend: ModelBackend,
    *,
    model: str = "default",
    max_history_chars: int = 24000,
    trace: TraceRecorder | None = None,
    t: int = 0,
) -> ApiNavAction:
    """Sample the next action, enforcing the navigation rules.

    Each violation type (unparseable call, empty query, url not in the
    last results, url already visited) gets at most one corrective
    re-ask per turn; a repeat of the same type terminates the run. The
    returned action is guaranteed never to AGGREGATE a visited url.
    """
    corrected: set[str] = set()
    observations: list[str] = []
    result_urls = {r.url for r in state.last_results}

    def violation(kind: str, note: str, terminate_message: str) -> ApiNavAction | None:
        if kind in corrected:
            return ApiNavAction("TERMINATE", terminate_message)
        corrected.add(kind)
        observations.append(note)
        if trace is not None:
            trace.emit(
                t,
                "navigator",
                "navigation_retry",
                {"violation": kind, "note": note},
                outcome="retry",
            )
        return None

    while True:
        prompt = build_prompt(state, max_history_chars, observations, trace, t)
        raw = backend.complete(prompt, model=model, response_mode="json")
        call = parse_tool_call(raw)
        if call is None:
            if extract_json_object(raw) is None and raw.strip():
                # no JSON at all: read the output as a terminating message
                return ApiNavAction("TERMINATE", _plain_message(raw))
            action = violation(
                "parse",
                "the last response was not a valid tool call; answer with exactly "
                "one JSON object in the specified format",
                "parse failure",
            )
            if action is not None:
                return action
            continue
        tool, argument = call["tool"], call["argument"].strip()
        if tool == "terminate":
            return ApiNavAction("TERMINATE", argument or _plain_message(call["thought"]))
        if tool == "search":
            if not argument:
                action = violation(
                    "empty_query",
                    "the search tool needs a non-empty query string",
                    "repeated empty search query",
                )
                if action is not None:
                    return action
                continue
            return ApiNavAction("SEARCH", argument)
        # aggregate
        if argument not in result_urls:
            action = violation(
                "not_in_results",
                f"the url {argument or '(empty)'} is not among the most recent "
                "search results; choose one of them or search again",
                "repeated aggregate outside search results",
            )
            if action is not None:
                return action
            continue
        if argument in state.visited:
            action = violation(
                "visited",
                f"the url {argument} was already visited; choose a different url",
                "repeated aggregate of a visited url",
            )
            if action is not None:
                return action
            continue
        return ApiNavAction("AGGREGATE", argument)
