"""Frozen substitution values and loaders for the prompt golden files.

Each template has a golden file under tests/goldens/ holding the exact
rendered output for the values below. Any edit to a packaged template or
to the renderer shows up as a byte diff against these files.
"""

from __future__ import annotations

from pathlib import Path

GOLDENS_DIR = Path(__file__).parent / "goldens"

_TASK = "Who discovered Titan?"
_TITAN = "https://miniwiki.example/titan"
_STACK_LINE = f"[0] Titan orbits Saturn. (source: {_TITAN})"
_PROVIDED_LINE = f"[0] Titan was discovered by Christiaan Huygens. (source: {_TITAN})"

_AGGREGATOR_VALUES = {
    "num_to_aggregate": 5,
    "user_task": _TASK,
    "num_iterations": 5,
    "counter": 1,
    "aggregated_list": _STACK_LINE,
    "provided_list": _PROVIDED_LINE,
}

GOLDEN_VALUES: dict[str, dict] = {
    "navigator_api": {"user_task": _TASK},
    "extractor_api": {
        "data": "Titan was discovered in 1655 by Christiaan Huygens.",
        "user_task": _TASK,
    },
    "aggregator_api": dict(_AGGREGATOR_VALUES),
    "navigator_visual": {},
    "extractor_visual": {
        "task": _TASK,
        "search_motivation": "Find the discoverer of Titan.",
    },
    "aggregator_visual": dict(_AGGREGATOR_VALUES),
    "judge": {
        "question": _TASK,
        "predicted": "Christiaan Huygens discovered Titan.",
        "answer": "Christiaan Huygens",
    },
    "answer": {
        "user_task": _TASK,
        "aggregated_passages": _PROVIDED_LINE,
    },
}

# The decision block every rendered judge prompt must end with, frozen
# here by hand, indentation and all.
JUDGE_OUTPUT_FORMAT_BLOCK = (
    "Output Format\n"
    "You should only respond in JSON format as described below and ensure "
    "the response can be parsed by Python json.loads.\n"
    "Response Format:\n"
    "{\n"
    '    "Explanation": "(How you made the decision?)",\n'
    '    "Decision": "TRUE" or "FALSE"\n'
    "}"
)


def golden_path(name: str) -> Path:
    return GOLDENS_DIR / f"rendered_{name}.txt"


def load_golden(name: str) -> str:
    return golden_path(name).read_text(encoding="utf-8")
