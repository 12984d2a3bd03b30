"""A complete multi-hop run in the direct API-driven setting.

Everything here is offline and deterministic: the web is a five-page
fixture defined inline, search runs over a tiny keyword index, and the
model is a scripted backend whose turns are listed in run order. The
run itself is the real production loop: navigator tool calls, extractor
passages, aggregator curation with feedback, and a final answer from
the stack.

Run from the repository root:

    python3 demos/02_api_run.py
"""

from __future__ import annotations

import json

from webgather import (
    Engine,
    FixtureScraper,
    FixtureSearchProvider,
    ScriptedModelBackend,
    Task,
    default_config,
    fixture_web_from_dict,
    run_and_answer,
)

TITAN = "https://demo.example/titan"
HUYGENS = "https://demo.example/huygens"
HAGUE = "https://demo.example/the-hague"
SATURN = "https://demo.example/saturn"
CLOCKS = "https://demo.example/pendulum-clock"

web = fixture_web_from_dict({
    "pages": {
        TITAN: {
            "title": "Titan (moon)",
            "body_text": "Titan is the largest moon of Saturn. It was discovered "
                         "on 25 March 1655 by the Dutch astronomer Christiaan "
                         "Huygens, using a telescope he built with his brother.",
            "links": [HUYGENS, SATURN],
        },
        HUYGENS: {
            "title": "Christiaan Huygens",
            "body_text": "Christiaan Huygens was born on 14 April 1629 in The "
                         "Hague. He discovered Titan in 1655 and invented the "
                         "pendulum clock in 1656.",
            "links": [HAGUE, TITAN, CLOCKS],
        },
        HAGUE: {
            "title": "The Hague",
            "body_text": "The Hague is a city on the west coast of the "
                         "Netherlands and the seat of its government.",
            "links": [],
        },
        SATURN: {
            "title": "Saturn",
            "body_text": "Saturn is the sixth planet from the Sun, known for "
                         "its ring system.",
            "links": [TITAN],
        },
        CLOCKS: {
            "title": "Pendulum clock",
            "body_text": "The pendulum clock, invented by Christiaan Huygens in "
                         "1656, was the world's most precise timekeeper for "
                         "nearly 300 years.",
            "links": [HUYGENS],
        },
    },
    "search_index": {
        "titan moon discoverer": [TITAN, SATURN],
        "christiaan huygens born city birthplace": [HUYGENS, HAGUE],
    },
})


def nav(thought: str, tool: str, argument: str) -> str:
    return json.dumps({"thought": thought, "tool": tool, "argument": argument})


def extracted(*paragraphs: str) -> str:
    return json.dumps({"paragraphs": list(paragraphs)})


def curated(actions: list[str], feedback: str) -> str:
    return json.dumps({"thoughts": "curating", "actions": actions,
                       "feedback": feedback})


# The scripted model's turns, in the exact order the loop consumes them:
# navigator, navigator, extractor, aggregator, navigator, ... answer last.
turns = [
    nav("Find who discovered Titan first.", "search", "titan moon discoverer"),
    nav("The Titan page should name the discoverer.", "aggregate", TITAN),
    extracted("Titan was discovered on 25 March 1655 by Christiaan Huygens."),
    curated(["ADD(0)"], "The discoverer is aggregated: Christiaan Huygens. "
                        "Now find the city where he was born."),
    nav("Second hop: his birthplace.", "search",
        "christiaan huygens born city birthplace"),
    nav("His biography page should say.", "aggregate", HUYGENS),
    extracted("Christiaan Huygens was born on 14 April 1629 in The Hague."),
    curated(["ADD(0)"], "Both facts are aggregated; the birth city is The "
                        "Hague. You can terminate."),
    nav("Both hops are done.", "terminate", "found the birth city"),
    "Christiaan Huygens, who discovered Titan, was born in The Hague.",
]

engine = Engine(
    model=ScriptedModelBackend(turns),
    search=FixtureSearchProvider(web),
    scraper=FixtureScraper(web),
)
task = Task(
    id="demo-api",
    query="In which city was the astronomer who discovered Titan born?",
    access_mode="api",
)

result = run_and_answer(task, default_config("api"), engine)

print(f"task: {task.query}\n")
print("what happened, from the trace:")
for event in result.trace:
    if event.actor == "navigator" and event.kind == "SEARCH":
        print(f"  t={event.t} SEARCH {event.payload['query']!r}"
              f" -> {len(event.payload['results'])} results")
    elif event.actor == "navigator" and event.kind == "AGGREGATE":
        print(f"  t={event.t} AGGREGATE {event.payload['url']}")
    elif event.actor == "extractor" and event.kind == "extract":
        print(f"       extractor: {event.payload['paragraphs']} passage(s)"
              f" from {event.payload['chunks']} chunk(s)")
    elif event.actor == "aggregator" and event.kind == "update":
        print(f"       aggregator: {event.payload['actions']}"
              f" -> stack size {event.payload['stack_size']};"
              f" terminate requested: {event.payload['terminate_requested']}")
    elif event.actor == "navigator" and event.kind == "TERMINATE":
        print(f"  t={event.t} TERMINATE ({event.payload['message']})")

print(f"\ntermination: {result.termination_reason}"
      f" after {result.steps_used} steps,"
      f" {result.aggregations_used} aggregations")
print("\nfinal stack:")
for i, passage in enumerate(result.stack):
    print(f"  [{i}] {passage.text}")
print(f"\nanswer: {result.answer}")
