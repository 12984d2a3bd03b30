"""Extractor: chunking, parsing, capping, multimodal prompts."""

from __future__ import annotations

import json

import pytest
from hypothesis import given, strategies as st

from webgather import (
    ExtractionRequest,
    ExtractionParseFailure,
    FetchFailure,
    ScriptedModelBackend,
    Task,
    TraceRecorder,
    chunk_page_text,
    extract_from_screenshots,
    extract_from_text,
)
from webgather.backends.browser import Screenshot

URL = "https://miniwiki.example/titan"
PNG = b"\x89PNG\r\n\x1a\nfake"


def request(mode: str = "api") -> ExtractionRequest:
    task = Task(id="t1", query="Who discovered Titan?", access_mode=mode)
    return ExtractionRequest(task=task, source_url=URL,
                             motivation="Find the discoverer.", timestep=3)


def paras(*texts) -> str:
    return json.dumps({"paragraphs": list(texts)})


def shot(offset: int = 0) -> Screenshot:
    return Screenshot(image=PNG, scroll_offset_px=offset, viewport=(1280, 720))


def test_chunk_identity_and_size():
    # first paragraph is 1800 chars, so it hard-splits once before the
    # blank-line boundary can be used
    text = ("alpha " * 300 + "\n\n" + "beta " * 300).strip()
    chunks = chunk_page_text(text, 1600)
    assert "".join(chunks) == text
    assert [len(c) for c in chunks] == [1600, 202, 1499]
    assert chunks[1].endswith("\n\n")


def test_chunk_prefers_blank_line_boundary():
    text = "a" * 500 + "\n\n" + "b" * 900
    chunks = chunk_page_text(text, 1000)
    assert chunks[0] == "a" * 500 + "\n\n"
    assert chunks[1] == "b" * 900


def test_chunk_falls_back_to_newline_then_hard_split():
    text = "a" * 500 + "\n" + "b" * 900
    chunks = chunk_page_text(text, 1000)
    assert chunks[0] == "a" * 500 + "\n"

    unbroken = "c" * 2500
    chunks = chunk_page_text(unbroken, 1000)
    assert chunks == ["c" * 1000, "c" * 1000, "c" * 500]


def test_chunk_rejects_tiny_budget_and_empty_text():
    with pytest.raises(ValueError):
        chunk_page_text("text", 999)
    assert chunk_page_text("", 1000) == []


@given(st.text(alphabet="ab \n", min_size=0, max_size=5000),
       st.integers(min_value=1000, max_value=2000))
def test_chunk_concatenation_identity(text, max_chars):
    chunks = chunk_page_text(text, max_chars)
    assert "".join(chunks) == text
    assert all(len(c) <= max_chars for c in chunks)
    assert all(chunks)


def test_extract_from_text_happy_path():
    backend = ScriptedModelBackend([paras("Huygens found Titan in 1655.")])
    passages = extract_from_text(request(), "Titan page body.", backend=backend)
    assert len(passages) == 1
    assert passages[0].text == "Huygens found Titan in 1655."
    assert passages[0].source_url == URL
    assert passages[0].step_extracted == 3
    prompt = backend.calls[0].text
    assert "Titan page body." in prompt
    assert "Who discovered Titan?" in prompt


def test_extract_from_text_one_call_per_chunk():
    text = "a" * 900 + "\n\n" + "b" * 900
    backend = ScriptedModelBackend([paras("from chunk one"), paras("from chunk two")])
    passages = extract_from_text(request(), text, backend=backend,
                                 cap=4, max_page_chars=1000)
    assert [p.text for p in passages] == ["from chunk one", "from chunk two"]
    assert len(backend.calls) == 2
    assert "a" * 900 in backend.calls[0].text
    assert "b" * 900 in backend.calls[1].text


def test_extract_from_text_caps_passages_and_traces_truncation():
    backend = ScriptedModelBackend([paras("one", "two", "three")])
    trace = TraceRecorder()
    passages = extract_from_text(request(), "body", backend=backend,
                                 cap=2, trace=trace)
    assert [p.text for p in passages] == ["one", "two"]
    truncations = [e for e in trace.events if e.kind == "truncation"]
    assert truncations[0].payload == {"kept": 2, "dropped": 1}


def test_extract_drops_non_string_paragraphs_with_trace():
    raw = json.dumps({"paragraphs": ["keep", 7, "", None, "also keep"]})
    backend = ScriptedModelBackend([raw])
    trace = TraceRecorder()
    passages = extract_from_text(request(), "body", backend=backend, trace=trace)
    assert [p.text for p in passages] == ["keep", "also keep"]
    dropped = [e for e in trace.events if e.kind == "paragraph_dropped"]
    assert len(dropped) == 3


def test_extract_retries_once_then_raises():
    backend = ScriptedModelBackend(["not json", paras("recovered")])
    passages = extract_from_text(request(), "body", backend=backend)
    assert [p.text for p in passages] == ["recovered"]
    assert len(backend.calls) == 2
    assert "could not be parsed" in backend.calls[1].text

    backend = ScriptedModelBackend(["still not json", "nor this"])
    with pytest.raises(ExtractionParseFailure):
        extract_from_text(request(), "body", backend=backend)


def test_extract_missing_paragraphs_key_raises():
    backend = ScriptedModelBackend([json.dumps({"sentences": []}),
                                    json.dumps({"sentences": []})])
    with pytest.raises(ExtractionParseFailure):
        extract_from_text(request(), "body", backend=backend)


def test_extract_empty_page_text_raises_fetch_failure():
    backend = ScriptedModelBackend([])
    with pytest.raises(FetchFailure):
        extract_from_text(request(), "   \n", backend=backend)


def test_extract_emits_extract_event():
    backend = ScriptedModelBackend([paras("p")])
    trace = TraceRecorder()
    extract_from_text(request(), "body", backend=backend, trace=trace)
    event = next(e for e in trace.events if e.kind == "extract")
    assert event.t == 3
    assert event.actor == "extractor"
    assert event.payload == {"source_url": URL, "chunks": 1, "paragraphs": 1}


def test_extract_from_screenshots_builds_multimodal_prompt():
    raw = json.dumps({"thoughts": "height visible", "paragraphs": ["55.86 metres"]})
    backend = ScriptedModelBackend([raw])
    trace = TraceRecorder()
    shots = [shot(0), shot(720)]
    passages = extract_from_screenshots(request("visual"), shots,
                                        backend=backend, trace=trace)
    assert [p.text for p in passages] == ["55.86 metres"]
    call = backend.calls[0]
    assert call.text.count("[image]") == 2
    assert "Find the discoverer." in call.text

    thoughts = next(e for e in trace.events if e.kind == "thoughts")
    assert thoughts.payload == {"thoughts": "height visible"}
    event = next(e for e in trace.events if e.kind == "extract")
    assert event.payload == {"source_url": URL, "screenshots": 2, "paragraphs": 1}


def test_extract_from_screenshots_requires_shots():
    with pytest.raises(ValueError):
        extract_from_screenshots(request("visual"), [],
                                 backend=ScriptedModelBackend([]))
