"""Batch evaluation over a small synthetic benchmark.

Three questions run against a three-page fixture web, each with its own
scripted model so the episodes are fully reproducible: one clean
single-hop success, one run that burns its whole step budget searching
and answers closed-book, and one whose script runs dry mid-episode to
show how failures are reported. The harness scores the answers, splits
aggregates by reasoning type, and writes one trace file per example,
which trace_stats then summarizes.

Run from the repository root:

    python3 demos/05_eval_report.py
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path

from webgather import (
    DatasetExample,
    Engine,
    FixtureScraper,
    FixtureSearchProvider,
    ScriptedModelBackend,
    config_from_dict,
    default_config,
    evaluate_dataset,
    fixture_web_from_dict,
    trace_stats,
)

MOON = "https://demo.example/moon"
TIDES = "https://demo.example/tides"
SEA = "https://demo.example/sea"

web = fixture_web_from_dict({
    "pages": {
        MOON: {
            "title": "Moon",
            "body_text": "The Moon is Earth's only natural satellite. Its "
                         "gravity is the main driver of ocean tides.",
            "links": [TIDES],
        },
        TIDES: {
            "title": "Tide",
            "body_text": "Tides are the rise and fall of sea levels caused by "
                         "the gravitational pull of the Moon and the Sun.",
            "links": [MOON, SEA],
        },
        SEA: {
            "title": "Sea level",
            "body_text": "Sea level is the average surface height of the "
                         "ocean.",
            "links": [],
        },
    },
    "search_index": {
        "what causes ocean tides": [TIDES, MOON],
        "deepest lake on the moon": [],
    },
})


def nav(tool: str, argument: str) -> str:
    return json.dumps({"thought": "next step", "tool": tool,
                       "argument": argument})


SCRIPTS: dict[str, tuple[str, ...]] = {
    # Clean run: search, aggregate, terminate, answer.
    "tides": (
        nav("search", "what causes ocean tides"),
        nav("aggregate", TIDES),
        json.dumps({"paragraphs": ["Tides are caused by the gravitational "
                                   "pull of the Moon and the Sun."]}),
        json.dumps({"thoughts": "covered", "actions": ["ADD(0)"],
                    "feedback": "Cause aggregated; terminate."}),
        nav("terminate", "found the cause"),
        "Ocean tides are caused by the gravitational pull of the Moon.",
    ),
    # Budget run: four fruitless searches exhaust max_steps=4, then the
    # closed-book answerer is asked anyway.
    "moon-lake": tuple(
        nav("search", "deepest lake on the moon") for _ in range(4)
    ) + ("There are no lakes on the Moon.",),
    # Broken run: the script ends before the episode does.
    "broken": (
        nav("search", "what causes ocean tides"),
    ),
}

EXAMPLES = [
    DatasetExample(id="tides", question="What causes ocean tides?",
                   answer="the Moon", reasoning_type="single-hop"),
    DatasetExample(id="moon-lake", question="What is the deepest lake on the Moon?",
                   answer="there are no lakes", reasoning_type="adversarial"),
    DatasetExample(id="broken", question="What causes ocean tides?",
                   answer="the Moon", reasoning_type="single-hop"),
]


def engine_for(example: DatasetExample) -> Engine:
    return Engine(
        model=ScriptedModelBackend(list(SCRIPTS[example.id])),
        search=FixtureSearchProvider(web),
        scraper=FixtureScraper(web),
    )


config = config_from_dict({"max_steps": 4, "max_aggregations": 2},
                          base=default_config("api"))

with tempfile.TemporaryDirectory() as tmp:
    trace_dir = Path(tmp) / "traces"
    report = evaluate_dataset(EXAMPLES, config, engine_for,
                              mode="api", metric="accuracy",
                              trace_dir=trace_dir)

    print("per-example records:")
    for record in report.examples:
        if record.get("failed"):
            print(f"  {record['id']:9} FAILED ({record['error']})")
            continue
        print(f"  {record['id']:9} correct={record['correct']}"
              f" reason={record['termination_reason']}"
              f" flags={record['flags']}")

    print("\naggregates:")
    print(json.dumps(report.aggregates, indent=2, sort_keys=True))

    print("\nby reasoning type:")
    for type_name, stats in sorted(report.per_type.items()):
        print(f"  {type_name}: {json.dumps(stats, sort_keys=True)}")

    stats = trace_stats(trace_dir)
    print(f"\ntrace stats over {stats.run_count} trace files:")
    print(f"  termination success rate: {stats.termination_success_rate:.0%}")
    for kind in ("SEARCH", "AGGREGATE", "TERMINATE"):
        print(f"  mean {kind} per run: {stats.mean_actions[kind]:.2f}")
