"""A complete run in the interactive visual setting.

The visual navigator works in two model calls per turn: first it writes
a free-text description of what to do next while looking at a
screenshot, then a grounding call maps that description onto one of the
numbered elements on the page. Keyword shortcuts are the exception:
when the description itself says AGGREGATE, GO BACK, or TERMINATE, the
navigator acts on the keyword and skips grounding entirely.

The browser here is the deterministic fixture driver: a portal home
page with a search box, synthetic results pages, and content pages
whose links come from the fixture document. Screenshots are real PNG
bytes, so the extractor runs its screenshot path, thoughts included.

Run from the repository root:

    python3 demos/03_visual_run.py
"""

from __future__ import annotations

import json

from webgather import (
    Engine,
    FixtureBrowser,
    ScriptedModelBackend,
    Task,
    default_config,
    fixture_web_from_dict,
    run_and_answer,
)

PORTAL = "https://portal.example/"
TOWER = "https://demo.example/leaning-tower"
PISA = "https://demo.example/pisa"

web = fixture_web_from_dict({
    "pages": {
        PORTAL: {
            "title": "Search Home",
            "body_text": "Type a query and press enter.",
            "links": [],
        },
        TOWER: {
            "title": "Leaning Tower of Pisa",
            "body_text": "The Leaning Tower of Pisa is the bell tower of Pisa "
                         "Cathedral. Its height is 55.86 metres on the low "
                         "side and 56.67 metres on the high side.",
            "links": [PISA],
        },
        PISA: {
            "title": "Pisa",
            "body_text": "Pisa is a city in Tuscany, Italy, known for its "
                         "leaning bell tower.",
            "links": [TOWER],
        },
    },
    "search_index": {
        "leaning tower pisa height": [TOWER, PISA],
    },
})


def ground(action: str, element: int | None = None, text: str | None = None) -> str:
    payload: dict[str, object] = {"action": action}
    if element is not None:
        payload["element"] = element
    if text is not None:
        payload["text"] = text
    return json.dumps(payload)


# Call order per turn: description, then grounding unless a shortcut
# keyword fires. An aggregate turn consumes an extractor completion and
# an aggregator decision instead of a grounding.
turns = [
    "Type the height query into the search box.",
    ground("TYPE", element=0, text="leaning tower pisa height"),
    "Press enter to submit the search.",
    ground("PRESS_ENTER"),
    "Open the first result, the tower article.",
    ground("CLICK", element=2),
    "This is the linked city page, not the tower. Click through to check it.",
    ground("CLICK", element=0),
    "Wrong page; GO BACK to the tower article.",
    "The height is stated on screen. AGGREGATE INFORMATION.",
    json.dumps({"thoughts": "The low-side height is visible in the body.",
                "paragraphs": ["The Leaning Tower of Pisa is 55.86 metres "
                               "tall on its low side."]}),
    json.dumps({"thoughts": "One passage covers the question.",
                "actions": ["ADD(0)"],
                "feedback": "Height aggregated: 55.86 metres. Terminate."}),
    "TERMINATE",
    "The Leaning Tower of Pisa is 55.86 metres tall on its low side.",
]

engine = Engine(
    model=ScriptedModelBackend(turns),
    browser=FixtureBrowser(web, PORTAL),
)
task = Task(
    id="demo-visual",
    query="How tall is the Leaning Tower of Pisa on its low side?",
    access_mode="visual",
)

result = run_and_answer(task, default_config("visual"), engine)

PRIMITIVES = {"CLICK", "TYPE", "SELECT", "PRESS_ENTER", "GO_BACK"}

print(f"task: {task.query}\n")
print("what happened, from the trace:")
for event in result.trace:
    if event.actor == "navigator" and event.kind == "action_description":
        print(f"  t={event.t} describe: {event.payload['description']}")
    elif event.actor == "navigator" and event.kind in PRIMITIVES:
        print(f"       executed {event.payload['action']}"
              f" -> now at {event.payload['url_after']}")
    elif event.actor == "navigator" and event.kind == "AGGREGATE":
        print(f"       shortcut: AGGREGATE on {event.payload['url']}")
    elif event.actor == "extractor" and event.kind == "thoughts":
        print(f"       extractor thoughts: {event.payload['thoughts']}")
    elif event.actor == "extractor" and event.kind == "extract":
        print(f"       extractor: {event.payload['paragraphs']} passage(s)"
              f" from {event.payload['screenshots']} screenshot(s)")
    elif event.actor == "aggregator" and event.kind == "update":
        print(f"       aggregator: {event.payload['actions']}"
              f" -> stack size {event.payload['stack_size']}")
    elif event.actor == "navigator" and event.kind == "TERMINATE":
        print(f"  t={event.t} shortcut: TERMINATE")

print(f"\ntermination: {result.termination_reason}"
      f" after {result.steps_used} steps,"
      f" {result.aggregations_used} aggregations")
print("\nfinal stack:")
for i, passage in enumerate(result.stack):
    print(f"  [{i}] {passage.text}")
print(f"\nanswer: {result.answer}")
