"""API navigator: tool-call parsing, history, rule enforcement."""

from __future__ import annotations

import json

from webgather import (
    Feedback,
    ScriptedModelBackend,
    SearchResult,
    Task,
    TraceRecorder,
    next_action,
    parse_tool_call,
)
from webgather.navigator_api import (
    NO_RESULTS_DIGEST,
    REPEATED_RESULTS_NOTE,
    ApiNavState,
    HistoryEntry,
    build_prompt,
    observe_search,
    record_aggregate,
    record_terminate,
    serialize_history,
)

TITAN = "https://miniwiki.example/titan"
SATURN = "https://miniwiki.example/saturn"


def tool(thought: str, name: str, argument: str) -> str:
    return json.dumps({"thought": thought, "tool": name, "argument": argument})


def result(url: str, snippet: str = "snippet text") -> SearchResult:
    return SearchResult(url=url, title="Title", snippet=snippet)


def state(**kwargs) -> ApiNavState:
    task = Task(id="t1", query="Who discovered Titan?")
    return ApiNavState(task=task, feedback=Feedback.initial(5), **kwargs)


def test_parse_tool_call_happy_path():
    raw = tool("let me look", "search", "titan discoverer")
    assert parse_tool_call(raw) == {
        "thought": "let me look", "tool": "search", "argument": "titan discoverer",
    }


def test_parse_tool_call_normalizes_tool_case():
    assert parse_tool_call(json.dumps({"tool": " Search ", "argument": "x"}))["tool"] == "search"


def test_parse_tool_call_accepts_surrounding_prose():
    raw = "I will search now.\n" + tool("t", "aggregate", TITAN)
    assert parse_tool_call(raw)["tool"] == "aggregate"


def test_parse_tool_call_rejects_unknown_tool_and_no_json():
    assert parse_tool_call(json.dumps({"tool": "fly", "argument": "up"})) is None
    assert parse_tool_call("no json at all") is None
    assert parse_tool_call("") is None


def test_parse_tool_call_stringifies_non_string_argument():
    raw = json.dumps({"tool": "search", "argument": 42})
    assert parse_tool_call(raw)["argument"] == "42"


def test_observe_search_digest():
    snippet = "a" * 100
    new = observe_search(state(), "titan", [result(TITAN, snippet), result(SATURN)])
    entry = new.history[-1]
    assert entry.action == "SEARCH('titan')"
    assert entry.observation.startswith("2 results: ")
    assert f"{TITAN} - " + "a" * 60 in entry.observation
    assert "a" * 61 not in entry.observation
    assert new.last_results == (result(TITAN, snippet), result(SATURN))


def test_observe_search_empty_results():
    new = observe_search(state(), "titan", [])
    assert new.history[-1].observation == NO_RESULTS_DIGEST
    assert new.last_results == ()


def test_observe_search_error():
    new = observe_search(state(), "titan", [], error="provider down")
    assert "provider down" in new.history[-1].observation


def test_observe_search_flags_repeated_results():
    first = observe_search(state(), "titan", [result(TITAN)])
    second = observe_search(first, "titan again", [result(TITAN)])
    assert second.history[-1].observation.endswith(REPEATED_RESULTS_NOTE)
    assert REPEATED_RESULTS_NOTE not in first.history[-1].observation


def test_record_aggregate_keeps_page_context():
    searched = observe_search(state(), "titan", [result(TITAN), result(SATURN)])
    feedback = Feedback("Now find the birthplace.", 4)
    aggregated = record_aggregate(searched, TITAN, feedback)
    assert aggregated.last_results == searched.last_results
    assert TITAN in aggregated.visited
    assert aggregated.feedback == feedback
    assert aggregated.history[-1].observation == "Now find the birthplace."


def test_record_terminate_appends_history():
    new = record_terminate(state(), "all done")
    assert new.history[-1] == HistoryEntry(action="TERMINATE", observation="all done")


def test_serialize_history_empty():
    assert serialize_history((), 1000) == "(none yet)"


def test_serialize_history_drops_oldest_first():
    history = tuple(
        HistoryEntry(action=f"SEARCH('q{i}')", observation="x" * 80) for i in range(6)
    )
    trace = TraceRecorder()
    text = serialize_history(history, 300, trace, 5)
    assert text.startswith("(earlier history truncated:")
    assert "q5" in text
    assert "q0" not in text
    event = next(e for e in trace.events if e.kind == "history_truncated")
    assert event.payload["dropped"] >= 1


def test_build_prompt_sections():
    searched = observe_search(state(), "titan", [result(TITAN)])
    fed = record_aggregate(searched, TITAN, Feedback("Look for the year.", 4))
    prompt = build_prompt(fed)
    assert "Who discovered Titan?" in prompt
    assert "Previous actions and observations:" in prompt
    assert "Aggregator feedback: Look for the year." in prompt
    assert prompt.index("Previous actions") < prompt.index("Aggregator feedback:")


def test_build_prompt_includes_extra_observations():
    prompt = build_prompt(state(), extra_observations=["fix your JSON"])
    assert "Observation: fix your JSON" in prompt


def test_next_action_search():
    backend = ScriptedModelBackend([tool("t", "search", "titan discoverer")])
    action = next_action(state(), backend)
    assert (action.kind, action.value) == ("SEARCH", "titan discoverer")


def test_next_action_aggregate_from_results():
    searched = observe_search(state(), "titan", [result(TITAN)])
    backend = ScriptedModelBackend([tool("t", "aggregate", TITAN)])
    action = next_action(searched, backend)
    assert (action.kind, action.value) == ("AGGREGATE", TITAN)


def test_next_action_terminate_uses_thought_when_argument_empty():
    backend = ScriptedModelBackend([tool("the stack is enough", "terminate", "")])
    action = next_action(state(), backend)
    assert (action.kind, action.value) == ("TERMINATE", "the stack is enough")


def test_next_action_reasks_once_on_bad_json():
    trace = TraceRecorder()
    backend = ScriptedModelBackend([
        json.dumps({"tool": "fly"}),
        tool("t", "search", "titan"),
    ])
    action = next_action(state(), backend, trace=trace, t=2)
    assert action.kind == "SEARCH"
    assert len(backend.calls) == 2
    assert "not a valid tool call" in backend.calls[1].text
    retry = next(e for e in trace.events if e.kind == "navigation_retry")
    assert retry.payload["violation"] == "parse"
    assert retry.outcome == "retry"


def test_next_action_terminates_on_repeated_violation():
    backend = ScriptedModelBackend([
        json.dumps({"tool": "fly"}),
        json.dumps({"tool": "swim"}),
    ])
    action = next_action(state(), backend)
    assert (action.kind, action.value) == ("TERMINATE", "parse failure")


def test_next_action_plain_text_reads_as_terminate():
    backend = ScriptedModelBackend([
        "I believe the aggregated information answers the question."
    ])
    action = next_action(state(), backend)
    assert action.kind == "TERMINATE"
    assert action.value == "I believe the aggregated information answers the question."


def test_next_action_empty_query_violation():
    trace = TraceRecorder()
    backend = ScriptedModelBackend([
        tool("t", "search", "   "),
        tool("t", "search", "titan"),
    ])
    action = next_action(state(), backend, trace=trace)
    assert (action.kind, action.value) == ("SEARCH", "titan")
    retry = next(e for e in trace.events if e.kind == "navigation_retry")
    assert retry.payload["violation"] == "empty_query"


def test_next_action_rejects_aggregate_outside_results():
    searched = observe_search(state(), "titan", [result(TITAN)])
    trace = TraceRecorder()
    backend = ScriptedModelBackend([
        tool("t", "aggregate", SATURN),
        tool("t", "aggregate", TITAN),
    ])
    action = next_action(searched, backend, trace=trace)
    assert (action.kind, action.value) == ("AGGREGATE", TITAN)
    retry = next(e for e in trace.events if e.kind == "navigation_retry")
    assert retry.payload["violation"] == "not_in_results"


def test_next_action_rejects_revisit():
    searched = observe_search(state(), "titan", [result(TITAN), result(SATURN)])
    visited = record_aggregate(searched, TITAN, Feedback("more", 4))
    backend = ScriptedModelBackend([
        tool("t", "aggregate", TITAN),
        tool("t", "aggregate", SATURN),
    ])
    action = next_action(visited, backend)
    assert (action.kind, action.value) == ("AGGREGATE", SATURN)


def test_next_action_two_different_violations_both_get_retries():
    searched = observe_search(state(), "titan", [result(TITAN)])
    backend = ScriptedModelBackend([
        json.dumps({"tool": "fly"}),
        tool("t", "aggregate", SATURN),
        tool("t", "aggregate", TITAN),
    ])
    action = next_action(searched, backend)
    assert (action.kind, action.value) == ("AGGREGATE", TITAN)
    assert len(backend.calls) == 3
