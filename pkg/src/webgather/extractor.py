"""Extraction of task-relevant passages from fetched content.

Text pages are chunked at paragraph boundaries, each chunk goes through
the extraction prompt separately, and the per-chunk paragraph lists are
concatenated in chunk order before the per-page cap applies. Screenshot
extraction sends one multimodal prompt covering all captured viewports.

Model output is JSON with a "paragraphs" list; an empty list is a valid
outcome, not an error. One corrective retry is attempted before
ExtractionParseFailure is raised.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .backends.browser import Screenshot
from .backends.model import ModelBackend
from .core import Passage, Task, TraceRecorder
from .errors import ExtractionParseFailure, FetchFailure
from .jsontools import extract_json_object
from .prompts import render_template

MIN_CHUNK_CHARS = 1000

CORRECTIVE_SUFFIX = (
    "\n\nYour previous response could not be parsed. Respond with only the JSON "
    "object in the format given above."
)


@dataclass(frozen=True)
class ExtractionRequest:
    """What the extractor needs to know about one aggregation step."""

    task: Task
    source_url: str
    motivation: str
    timestep: int


def chunk_page_text(text: str, max_chars: int) -> list[str]:
    """Split text into chunks of at most ``max_chars``.

    Splits happen at paragraph boundaries (after a blank line, else after
    a newline) whenever one exists inside the window; only a boundary-free
    window is hard-split. The chunks concatenate back to the input
    exactly.
    """
    if max_chars < MIN_CHUNK_CHARS:
        raise ValueError(f"max_chars must be >= {MIN_CHUNK_CHARS}, got {max_chars}")
    if not text:
        return []
    chunks: list[str] = []
    start = 0
    while start < len(text):
        if len(text) - start <= max_chars:
            chunks.append(text[start:])
            break
        window = text[start : start + max_chars]
        cut = window.rfind("\n\n")
        if cut > 0:
            end = start + cut + 2
        else:
            cut = window.rfind("\n")
            end = start + cut + 1 if cut > 0 else start + max_chars
        chunks.append(text[start:end])
        start = end
    return chunks


def _complete_json(
    backend: ModelBackend, prompt: object, model: str
) -> tuple[dict, str]:
    """One model call with one corrective retry; returns (parsed, raw)."""
    raw = backend.complete(prompt, model=model, response_mode="json")
    parsed = extract_json_object(raw)
    if parsed is not None:
        return parsed, raw
    if isinstance(prompt, str):
        retry_prompt: object = prompt + CORRECTIVE_SUFFIX
    else:
        retry_prompt = list(prompt) + [CORRECTIVE_SUFFIX.strip()]
    raw = backend.complete(retry_prompt, model=model, response_mode="json")
    parsed = extract_json_object(raw)
    if parsed is None:
        raise ExtractionParseFailure(
            f"extractor output had no JSON object after retry: {raw[:200]!r}"
        )
    return parsed, raw


def _paragraphs_from(parsed: dict, trace: TraceRecorder | None, t: int) -> list[str]:
    raw_list = parsed.get("paragraphs")
    if not isinstance(raw_list, list):
        raise ExtractionParseFailure(
            "extractor output is missing a 'paragraphs' list"
        )
    paragraphs = []
    for item in raw_list:
        if isinstance(item, str) and item.strip():
            paragraphs.append(item)
        elif trace is not None:
            trace.emit(
                t,
                "extractor",
                "paragraph_dropped",
                {"item": repr(item)[:200]},
                outcome="skipped",
            )
    return paragraphs


def _to_passages(
    paragraphs: list[str],
    request: ExtractionRequest,
    cap: int,
    trace: TraceRecorder | None,
) -> list[Passage]:
    if len(paragraphs) > cap and trace is not None:
        trace.emit(
            request.timestep,
            "extractor",
            "truncation",
            {"kept": cap, "dropped": len(paragraphs) - cap},
        )
    return [
        Passage(text=p, source_url=request.source_url, step_extracted=request.timestep)
        for p in paragraphs[:cap]
    ]


def extract_from_text(
    request: ExtractionRequest,
    text: str,
    *,
    backend: ModelBackend,
    cap: int = 2,
    max_page_chars: int = 24000,
    model: str = "default",
    trace: TraceRecorder | None = None,
) -> list[Passage]:
    """Extract up to ``cap`` passages from a text page."""
    if not text.strip():
        raise FetchFailure(f"page text for {request.source_url} is empty")
    paragraphs: list[str] = []
    chunks = chunk_page_text(text, max_page_chars)
    for chunk in chunks:
        prompt = render_template(
            "extractor_api", data=chunk, user_task=request.task.query
        )
        parsed, _raw = _complete_json(backend, prompt, model)
        paragraphs.extend(_paragraphs_from(parsed, trace, request.timestep))
    if trace is not None:
        trace.emit(
            request.timestep,
            "extractor",
            "extract",
            {
                "source_url": request.source_url,
                "chunks": len(chunks),
                "paragraphs": min(len(paragraphs), cap),
            },
        )
    return _to_passages(paragraphs, request, cap, trace)


def extract_from_screenshots(
    request: ExtractionRequest,
    shots: Sequence[Screenshot],
    *,
    backend: ModelBackend,
    cap: int = 4,
    model: str = "default",
    trace: TraceRecorder | None = None,
) -> list[Passage]:
    """Extract up to ``cap`` passages from page screenshots.

    The model's "thoughts" field is recorded in the trace but is not
    part of the returned passages.
    """
    if not shots:
        raise ValueError("extract_from_screenshots needs at least one screenshot")
    header = render_template(
        "extractor_visual",
        task=request.task.query,
        search_motivation=request.motivation,
    )
    prompt: list[object] = [header, *shots]
    parsed, _raw = _complete_json(backend, prompt, model)
    thoughts = parsed.get("thoughts")
    if trace is not None and thoughts is not None:
        trace.emit(
            request.timestep,
            "extractor",
            "thoughts",
            {"thoughts": str(thoughts)[:2000]},
        )
    paragraphs = _paragraphs_from(parsed, trace, request.timestep)
    if trace is not None:
        trace.emit(
            request.timestep,
            "extractor",
            "extract",
            {
                "source_url": request.source_url,
                "screenshots": len(shots),
                "paragraphs": min(len(paragraphs), cap),
            },
        )
    return _to_passages(paragraphs, request, cap, trace)
