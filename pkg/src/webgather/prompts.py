"""Prompt template loading and rendering.

Templates live as plain-text files next to this module and are the
contract surface for every model call: tests pin their rendered bytes.
Files use ``str.format`` syntax, so literal braces are doubled in the
source files and come out single in the rendered prompt.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources
from typing import Iterable

from .core import InfoStack, Passage

TEMPLATE_NAMES = (
    "navigator_api",
    "extractor_api",
    "aggregator_api",
    "navigator_visual",
    "extractor_visual",
    "aggregator_visual",
    "judge",
    "answer",
)


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    """Template text by basename, without the trailing file newline."""
    if name not in TEMPLATE_NAMES:
        raise KeyError(f"unknown prompt template: {name!r}")
    text = (resources.files(__package__) / "prompts" / f"{name}.txt").read_text(
        encoding="utf-8"
    )
    return text.removesuffix("\n")


def render_template(name: str, **values: object) -> str:
    return load_template(name).format(**values)


def render_passage_list(passages: Iterable[Passage] | InfoStack) -> str:
    """Passages as "[id] text (source: url)" lines; "(empty)" when none."""
    lines = [
        f"[{i}] {p.text} (source: {p.source_url})" for i, p in enumerate(passages)
    ]
    return "\n".join(lines) if lines else "(empty)"


def render_answer_prompt(user_task: str, stack: InfoStack) -> str:
    """The answering prompt; an empty stack is stated, not hidden."""
    if len(stack) == 0:
        body = "(no information was aggregated)"
    else:
        body = render_passage_list(stack)
    return render_template("answer", user_task=user_task, aggregated_passages=body)
