"""The run loop tying navigator, extractor, and aggregator together.

One run is a single bounded loop. Starting from the search home with an
empty stack and feedback "None", each iteration samples one navigator
action. An AGGREGATE action routes the current page through the
extractor and then the aggregator (spending one unit of aggregation
budget and leaving the page context untouched); any other action drives
the environment. The timestep advances once per iteration regardless.
The loop stops on TERMINATE, on either budget, or when the aggregator
has requested termination and the navigator has had one more turn to
comply.

Backend failures (exhausted scripts, missing credentials, transport
loss) end the run with ``fatal_error`` but preserve the partial stack
and the trace written so far. Everything else is recoverable: fetch and
parse problems become empty extractions, browser errors become no-op
turns.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from pathlib import Path

from .aggregator import update
from .backends.browser import BrowserDriver, capture_page_screenshots
from .backends.model import ModelBackend
from .backends.scrape import PageScraper
from .backends.search import DEFAULT_RESULT_LIMIT, SearchProvider
from .core import (
    Feedback,
    InfoStack,
    RunConfig,
    RunResult,
    Task,
    TraceRecorder,
    validate_config,
)
from .errors import (
    BackendUnavailable,
    ConfigError,
    ExtractionParseFailure,
    FetchFailure,
    GroundingFailure,
    NavigationTimeout,
    SearchFailure,
    StaleElement,
)
from .extractor import ExtractionRequest, extract_from_screenshots, extract_from_text
from .navigator_api import (
    ApiNavState,
    next_action,
    observe_search,
    record_aggregate,
    record_terminate,
)
from .navigator_visual import (
    LOOP_WINDOW,
    VisualHistoryEntry,
    VisualObservation,
    detect_loop,
    generate_action_description,
    ground_action,
    render_visual_action,
    shortcut_action,
)
from .prompts import render_answer_prompt


@dataclass
class Engine:
    """The backend bundle a run drives.

    api mode needs ``search`` and ``scraper``; visual mode needs
    ``browser``. The model backend serves every component, with the
    model id routed per component through the run config.
    """

    model: ModelBackend
    search: SearchProvider | None = None
    scraper: PageScraper | None = None
    browser: BrowserDriver | None = None


def _answer_model(config: RunConfig) -> str:
    # the answering model falls back to the navigator's model
    return config.component_models.get("answerer", config.model_for("navigator"))


def answer(task: Task, stack: InfoStack, *, backend: ModelBackend, model: str) -> str:
    """Produce the final answer from whatever was aggregated.

    An empty stack is not an error: the prompt says so explicitly and
    the model answers closed-book.
    """
    prompt = render_answer_prompt(task.query, stack)
    return backend.complete(prompt, model=model, response_mode="free_text")


def run_task(
    task: Task,
    config: RunConfig,
    engine: Engine,
    *,
    trace_path: str | Path | None = None,
) -> RunResult:
    """Run one task to completion; see the module docstring for the loop.

    The returned result carries the final stack, the in-memory trace,
    both budget counters, and the termination reason. The answer field
    is left None; compose with :func:`answer` or use
    :func:`run_and_answer`.
    """
    validate_config(config)
    recorder = TraceRecorder(trace_path)
    try:
        if task.access_mode == "api":
            return _run_api(task, config, engine, recorder)
        return _run_visual(task, config, engine, recorder)
    finally:
        recorder.close()


def run_and_answer(
    task: Task,
    config: RunConfig,
    engine: Engine,
    *,
    trace_path: str | Path | None = None,
) -> RunResult:
    result = run_task(task, config, engine, trace_path=trace_path)
    answer_text = answer(
        task, result.stack, backend=engine.model, model=_answer_model(config)
    )
    return dataclasses.replace(result, answer=answer_text)


def _emit_run_start(recorder: TraceRecorder, task: Task, config: RunConfig) -> None:
    recorder.emit(
        0,
        "orchestrator",
        "run_start",
        {
            "task_id": task.id,
            "access_mode": task.access_mode,
            "max_aggregations": config.max_aggregations,
            "max_steps": config.max_steps,
            "capacity": config.capacity,
        },
    )


def _emit_run_end(
    recorder: TraceRecorder, t: int, reason: str, k: int, stack: InfoStack
) -> None:
    recorder.emit(
        t,
        "orchestrator",
        "run_end",
        {
            "termination_reason": reason,
            "steps_used": t,
            "aggregations_used": k,
            "stack_size": len(stack),
        },
    )


def _run_api(
    task: Task, config: RunConfig, engine: Engine, recorder: TraceRecorder
) -> RunResult:
    if engine.search is None or engine.scraper is None:
        raise ConfigError("api mode requires search and scraper backends")
    stack = InfoStack((), config.capacity)
    state = ApiNavState(task=task, feedback=Feedback.initial(config.max_aggregations))
    t = 0
    k = 0
    reason = None
    _emit_run_start(recorder, task, config)
    try:
        while True:
            if k >= config.max_aggregations:
                reason = "aggregate_budget"
                break
            if t >= config.max_steps:
                reason = "step_budget"
                break
            grace_turn = state.feedback.terminate_requested
            action = next_action(
                state,
                engine.model,
                model=config.model_for("navigator"),
                max_history_chars=config.max_page_chars,
                trace=recorder,
                t=t,
            )
            if action.kind == "TERMINATE":
                recorder.emit(t, "navigator", "TERMINATE", {"message": action.value})
                state = record_terminate(state, action.value)
                t += 1
                reason = "navigator_terminate"
                break
            if action.kind == "AGGREGATE":
                url = action.value
                recorder.emit(
                    t,
                    "navigator",
                    "AGGREGATE",
                    {
                        "url": url,
                        "last_results": [r.url for r in state.last_results],
                        "visited": sorted(state.visited),
                    },
                )
                provided = _extract_api(task, url, t, config, engine, recorder, state)
                stack, feedback = update(
                    stack,
                    provided,
                    task,
                    aggregations_done=k,
                    config=config,
                    backend=engine.model,
                    trace=recorder,
                    t=t,
                )
                k += 1
                state = record_aggregate(state, url, feedback)
                t += 1
            else:
                query = action.value
                try:
                    results = engine.search.search(
                        query,
                        domain_filter=config.domain_filter,
                        limit=DEFAULT_RESULT_LIMIT,
                    )
                    recorder.emit(
                        t,
                        "navigator",
                        "SEARCH",
                        {"query": query, "results": [r.url for r in results]},
                    )
                    state = observe_search(state, query, results)
                except SearchFailure as exc:
                    recorder.emit(
                        t,
                        "navigator",
                        "SEARCH",
                        {"query": query, "results": []},
                        outcome="error",
                        error_detail=str(exc),
                    )
                    state = observe_search(state, query, [], error=str(exc))
                t += 1
            if grace_turn:
                # the aggregator asked to stop and the navigator used its
                # one extra turn on something else: enforce the stop
                reason = "aggregate_budget"
                break
    except BackendUnavailable as exc:
        recorder.emit(
            t, "orchestrator", "backend_failure", {}, outcome="error",
            error_detail=str(exc),
        )
        reason = "fatal_error"
    _emit_run_end(recorder, t, reason, k, stack)
    return RunResult(
        stack=stack,
        answer=None,
        trace=tuple(recorder.events),
        steps_used=t,
        aggregations_used=k,
        termination_reason=reason,
    )


def _extract_api(
    task: Task,
    url: str,
    t: int,
    config: RunConfig,
    engine: Engine,
    recorder: TraceRecorder,
    state: ApiNavState,
) -> list:
    page = engine.scraper.fetch(url)
    if not page.fetched_ok:
        recorder.emit(
            t,
            "orchestrator",
            "fetch_failed",
            {"url": url},
            outcome="error",
            error_detail=page.error,
        )
        return []
    request = ExtractionRequest(
        task=task, source_url=url, motivation=state.feedback.text, timestep=t
    )
    try:
        return extract_from_text(
            request,
            page.text,
            backend=engine.model,
            cap=config.max_passages_per_page,
            max_page_chars=config.max_page_chars,
            model=config.model_for("extractor"),
            trace=recorder,
        )
    except (ExtractionParseFailure, FetchFailure) as exc:
        recorder.emit(
            t,
            "extractor",
            "extract",
            {"source_url": url, "paragraphs": 0},
            outcome="error",
            error_detail=str(exc),
        )
        return []


def _observe(engine: Engine) -> VisualObservation:
    browser = engine.browser
    capture = browser.capture_screenshots(1)
    return VisualObservation(
        url=browser.current_url,
        screenshot=capture.shots[0],
        candidates=tuple(browser.candidates()),
    )


def _run_visual(
    task: Task, config: RunConfig, engine: Engine, recorder: TraceRecorder
) -> RunResult:
    if engine.browser is None:
        raise ConfigError("visual mode requires a browser driver")
    browser = engine.browser
    stack = InfoStack((), config.capacity)
    feedback = Feedback.initial(config.max_aggregations)
    history: list[VisualHistoryEntry] = []
    executed: list = []
    t = 0
    k = 0
    reason = None
    _emit_run_start(recorder, task, config)
    try:
        while True:
            if k >= config.max_aggregations:
                reason = "aggregate_budget"
                break
            if t >= config.max_steps:
                reason = "step_budget"
                break
            grace_turn = feedback.terminate_requested
            obs = _observe(engine)
            replan = detect_loop(executed, LOOP_WINDOW)
            description = generate_action_description(
                obs,
                task,
                feedback,
                history,
                backend=engine.model,
                model=config.model_for("navigator"),
                replan=replan,
                trace=recorder,
                t=t,
            )
            action = shortcut_action(description)
            if action is None:
                try:
                    action = ground_action(
                        description,
                        obs,
                        backend=engine.model,
                        model=config.model_for("navigator"),
                        trace=recorder,
                        t=t,
                    )
                except GroundingFailure as exc:
                    recorder.emit(
                        t,
                        "navigator",
                        "grounding_failure",
                        {"description": description[:200]},
                        outcome="error",
                        error_detail=str(exc),
                    )
                    history.append(
                        VisualHistoryEntry(description, "GROUNDING_FAILED")
                    )
                    t += 1
                    if grace_turn:
                        reason = "aggregate_budget"
                        break
                    continue
            rendered = render_visual_action(action)
            executed.append(action)
            if action.kind == "TERMINATE":
                recorder.emit(t, "navigator", "TERMINATE", {"description": description[:200]})
                history.append(VisualHistoryEntry(description, rendered))
                t += 1
                reason = "navigator_terminate"
                break
            if action.kind == "AGGREGATE":
                recorder.emit(t, "navigator", "AGGREGATE", {"url": obs.url})
                capture = capture_page_screenshots(browser, config.max_screenshots)
                if capture.truncated:
                    recorder.emit(
                        t,
                        "orchestrator",
                        "screenshots_truncated",
                        {"kept": len(capture.shots)},
                    )
                provided = _extract_visual(
                    task, obs.url, description, capture.shots, t, config, engine, recorder
                )
                stack, feedback = update(
                    stack,
                    provided,
                    task,
                    aggregations_done=k,
                    config=config,
                    backend=engine.model,
                    trace=recorder,
                    t=t,
                )
                k += 1
                history.append(VisualHistoryEntry(description, rendered))
                t += 1
            else:
                try:
                    browser.act(action)
                    recorder.emit(
                        t,
                        "navigator",
                        action.kind,
                        {"action": rendered, "url_after": browser.current_url},
                    )
                except (StaleElement, NavigationTimeout) as exc:
                    recorder.emit(
                        t,
                        "navigator",
                        action.kind,
                        {"action": rendered, "url_after": browser.current_url},
                        outcome="error",
                        error_detail=str(exc),
                    )
                history.append(VisualHistoryEntry(description, rendered))
                t += 1
            if grace_turn:
                reason = "aggregate_budget"
                break
    except BackendUnavailable as exc:
        recorder.emit(
            t, "orchestrator", "backend_failure", {}, outcome="error",
            error_detail=str(exc),
        )
        reason = "fatal_error"
    _emit_run_end(recorder, t, reason, k, stack)
    return RunResult(
        stack=stack,
        answer=None,
        trace=tuple(recorder.events),
        steps_used=t,
        aggregations_used=k,
        termination_reason=reason,
    )


def _extract_visual(
    task: Task,
    url: str,
    motivation: str,
    shots: tuple,
    t: int,
    config: RunConfig,
    engine: Engine,
    recorder: TraceRecorder,
) -> list:
    request = ExtractionRequest(
        task=task, source_url=url, motivation=motivation, timestep=t
    )
    try:
        return extract_from_screenshots(
            request,
            shots,
            backend=engine.model,
            cap=config.max_passages_per_page,
            model=config.model_for("extractor"),
            trace=recorder,
        )
    except ExtractionParseFailure as exc:
        recorder.emit(
            t,
            "extractor",
            "extract",
            {"source_url": url, "paragraphs": 0},
            outcome="error",
            error_detail=str(exc),
        )
        return []
