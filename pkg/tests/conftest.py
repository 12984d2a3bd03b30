"""Shared fixtures and run helpers for the test suite."""

from __future__ import annotations

from pathlib import Path

import pytest

from webgather import (
    Engine,
    FixtureBrowser,
    FixtureScraper,
    FixtureSearchProvider,
    FixtureWeb,
    RunResult,
    ScriptedModelBackend,
    Task,
    config_from_dict,
    default_config,
    load_fixture_web,
    run_and_answer,
)

FIXTURES_DIR = Path(__file__).parent / "fixtures"
WEB_PATH = FIXTURES_DIR / "web.json"
DATASET_PATH = FIXTURES_DIR / "dataset.jsonl"
HTML_DIR = FIXTURES_DIR / "html"
PORTAL_URL = "https://portal.example/"


@pytest.fixture(scope="session")
def web() -> FixtureWeb:
    return load_fixture_web(WEB_PATH)


def build_engine(mode: str, turns: list[str] | tuple[str, ...], web: FixtureWeb) -> Engine:
    backend = ScriptedModelBackend(list(turns))
    if mode == "api":
        return Engine(
            model=backend,
            search=FixtureSearchProvider(web),
            scraper=FixtureScraper(web),
        )
    return Engine(model=backend, browser=FixtureBrowser(web, PORTAL_URL))


def run_case(case, web: FixtureWeb, trace_path=None) -> tuple[RunResult, ScriptedModelBackend]:
    """Run one scripted end-to-end case; returns the result and backend."""
    engine = build_engine(case.mode, case.turns, web)
    config = default_config(case.mode)
    if case.config_overrides:
        config = config_from_dict(case.config_overrides, base=config)
    task = Task(
        id=case.id,
        query=case.question,
        access_mode=case.mode,
        gold_answer=case.gold,
        reasoning_type=case.reasoning_type,
    )
    result = run_and_answer(task, config, engine, trace_path=trace_path)
    return result, engine.model
