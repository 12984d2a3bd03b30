"""Navigator for the interactive visual setting.

Two stages per turn, mirroring a screenshot-based agent: first the model
writes a free-text description of the next action while looking at the
current screenshot (action generation), then a second call maps that
description onto a concrete page element and primitive (action
grounding). AGGREGATE, TERMINATE, and GO BACK are decided at the
description level and bypass grounding entirely; composite descriptions
("type X and press enter") ground to their first primitive only.

Scrolling is never an action: the extractor sees full-page screenshot
sequences instead. A loop detector watches the executed actions and,
when the same action repeats, the next generation prompt carries an
explicit replanning notice.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

from .backends.browser import ElementCandidate, Screenshot
from .backends.model import ModelBackend
from .core import Feedback, Task, TraceRecorder, VisualNavAction
from .errors import GroundingFailure
from .jsontools import extract_json_object
from .prompts import render_template

LOOP_WINDOW = 3

GROUNDABLE_KINDS = ("CLICK", "SELECT", "TYPE", "PRESS_ENTER", "GO_BACK")

REPLAN_NOTICE = (
    "Notice: the same action has been taken repeatedly without progress. "
    "Replan now and choose a different action."
)

CORRECTIVE_SUFFIX = (
    "\n\nYour previous response could not be grounded. Respond with only the JSON "
    "object in the format given above, using an element index from the list."
)

# Earliest match among these wins; each maps straight to an ungrounded action.
_SHORTCUTS = (
    ("AGGREGATE", re.compile(r"\bAGGREGATE\b", re.IGNORECASE)),
    ("GO_BACK", re.compile(r"\bGO[ _]BACK\b", re.IGNORECASE)),
    ("TERMINATE", re.compile(r"\bTERMINATE\b", re.IGNORECASE)),
)


@dataclass(frozen=True)
class VisualObservation:
    """What the navigator sees: the page url, the top-viewport
    screenshot, and the grounding candidates."""

    url: str
    screenshot: Screenshot
    candidates: tuple[ElementCandidate, ...]


@dataclass(frozen=True)
class VisualHistoryEntry:
    description: str
    action: str


def render_visual_action(action: VisualNavAction) -> str:
    """Stable string form used in history, traces, and loop payloads."""
    if action.kind == "CLICK":
        return f"CLICK({action.element_index})"
    if action.kind == "TYPE":
        return f"TYPE({action.element_index}, {action.text!r})"
    if action.kind == "SELECT":
        return f"SELECT({action.element_index}, {action.option!r})"
    return action.kind


def detect_loop(actions: Sequence[VisualNavAction], window: int = LOOP_WINDOW) -> bool:
    """True iff the last ``window`` actions are identical in kind and
    payload. Shorter histories never count as loops."""
    if window <= 0 or len(actions) < window:
        return False
    tail = actions[-window:]
    return all(a == tail[0] for a in tail)


def shortcut_action(description: str) -> VisualNavAction | None:
    """Grounding bypass for AGGREGATE / GO BACK / TERMINATE.

    The earliest keyword mention in the description decides; None means
    the description needs real grounding.
    """
    hits = []
    for kind, pattern in _SHORTCUTS:
        match = pattern.search(description)
        if match:
            hits.append((match.start(), kind))
    if not hits:
        return None
    _, kind = min(hits)
    return VisualNavAction(kind=kind)


def _history_block(history: Sequence[VisualHistoryEntry]) -> str:
    if not history:
        return "(none yet)"
    return "\n".join(f"{i}. {entry.action}" for i, entry in enumerate(history))


def generate_action_description(
    obs: VisualObservation,
    task: Task,
    feedback: Feedback,
    history: Sequence[VisualHistoryEntry],
    *,
    backend: ModelBackend,
    model: str = "default",
    replan: bool = False,
    trace: TraceRecorder | None = None,
    t: int = 0,
) -> str:
    """Stage one: free-text description of the next action."""
    sections = [
        f"You are navigating the web to gather information for this task: {task.query}",
        render_template("navigator_visual"),
        "Current page url: " + obs.url,
        "Previous actions:\n" + _history_block(history),
        "Aggregator feedback: " + feedback.text,
    ]
    if replan:
        sections.append(REPLAN_NOTICE)
    prompt: list[object] = ["\n\n".join(sections), obs.screenshot]
    description = backend.complete(prompt, model=model, response_mode="free_text")
    if trace is not None:
        trace.emit(
            t,
            "navigator",
            "action_description",
            {"description": description[:2000], "replan": replan},
        )
    return description


def _grounding_prompt(description: str, obs: VisualObservation) -> str:
    lines = [
        f"{c.index}. [{c.role}] {c.label}" for c in obs.candidates
    ]
    elements = "\n".join(lines) if lines else "(no interactable elements)"
    return (
        "You are grounding a described browser action to a concrete element on "
        "the current page.\n\n"
        f"Page url: {obs.url}\n"
        "Interactable elements:\n"
        f"{elements}\n\n"
        f"Action description: {description}\n\n"
        "Allowed actions: CLICK, SELECT, TYPE, PRESS_ENTER, GO_BACK.\n"
        "If the description contains several steps, ground only the first one.\n"
        "Respond with a single JSON object that can be parsed by Python json.loads.\n"
        "Response Format:\n"
        "{\n"
        '"action": one of CLICK, SELECT, TYPE, PRESS_ENTER, GO_BACK,\n'
        '"element": the integer index of the target element (omit for PRESS_ENTER and GO_BACK),\n'
        '"text": the text to type (TYPE only),\n'
        '"option": the option label to select (SELECT only)\n'
        "}"
    )


def parse_grounding(raw: str, candidate_count: int) -> VisualNavAction | None:
    """Pure grounding parse; never raises.

    Accepts the five primitives plus AGGREGATE/TERMINATE (in case the
    model grounds those anyway). A list in "action" grounds to its first
    item. Returns None for anything unusable, including element indexes
    outside the candidate list.
    """
    parsed = extract_json_object(raw)
    if parsed is None:
        return None
    verb = parsed.get("action")
    if isinstance(verb, list) and verb:
        verb = verb[0]
    if not isinstance(verb, str):
        return None
    kind = verb.strip().upper().replace(" ", "_")
    if kind in ("AGGREGATE", "TERMINATE"):
        return VisualNavAction(kind=kind)
    if kind not in GROUNDABLE_KINDS:
        return None
    if kind in ("PRESS_ENTER", "GO_BACK"):
        return VisualNavAction(kind=kind)
    element = parsed.get("element")
    if isinstance(element, str) and element.strip().isdigit():
        element = int(element.strip())
    if not isinstance(element, int) or isinstance(element, bool):
        return None
    if not 0 <= element < candidate_count:
        return None
    if kind == "CLICK":
        return VisualNavAction(kind="CLICK", element_index=element)
    if kind == "TYPE":
        text = parsed.get("text")
        if not isinstance(text, str):
            return None
        return VisualNavAction(kind="TYPE", element_index=element, text=text)
    option = parsed.get("option")
    if not isinstance(option, str) or not option:
        return None
    return VisualNavAction(kind="SELECT", element_index=element, option=option)


def ground_action(
    description: str,
    obs: VisualObservation,
    *,
    backend: ModelBackend,
    model: str = "default",
    trace: TraceRecorder | None = None,
    t: int = 0,
) -> VisualNavAction:
    """Stage two: map the description onto one primitive.

    One corrective retry; a second unusable response raises
    GroundingFailure and the page stays as it was.
    """
    prompt = _grounding_prompt(description, obs)
    raw = backend.complete(prompt, model=model, response_mode="json")
    action = parse_grounding(raw, len(obs.candidates))
    if action is None:
        if trace is not None:
            trace.emit(
                t,
                "navigator",
                "grounding_retry",
                {"raw": raw[:200]},
                outcome="retry",
            )
        raw = backend.complete(
            prompt + CORRECTIVE_SUFFIX, model=model, response_mode="json"
        )
        action = parse_grounding(raw, len(obs.candidates))
    if action is None:
        raise GroundingFailure(
            f"could not ground action description: {description[:200]!r}"
        )
    return action
