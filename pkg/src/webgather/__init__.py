"""webgather: feedback-driven web information aggregation.

A modular framework with three cooperating components: a navigator that
explores the web, an extractor that distills visited pages into candidate
passages, and an aggregator that curates a bounded information stack and
steers the navigator with natural-language feedback. Two access settings
share the same loop: direct API-driven access (search plus scraping) and
interactive visual access (screenshots plus browser primitives).

Deterministic fixture backends make every component runnable offline, so
runs, traces, and evaluations reproduce exactly.
"""

from __future__ import annotations

from .aggregator import (
    AggregatorDecision,
    StackAction,
    apply_actions,
    parse_action_string,
    parse_decision,
    update,
)
from .backends import (
    BrowserDriver,
    ElementCandidate,
    FingerprintModelBackend,
    FixtureBrowser,
    FixturePage,
    FixtureScraper,
    FixtureSearchProvider,
    FixtureWeb,
    LiveModelBackend,
    LiveScraper,
    LiveSearchProvider,
    ModelBackend,
    PageElement,
    PageScraper,
    PageText,
    PlaywrightBrowser,
    RecordedCall,
    Screenshot,
    ScreenshotCapture,
    ScriptedModelBackend,
    SearchProvider,
    SearchResult,
    fixture_web_from_dict,
    html_to_text,
    load_fixture_web,
    prompt_fingerprint,
    validate_fixture_web,
)
from .core import (
    ACCESS_MODES,
    API_ACTION_KINDS,
    INITIAL_FEEDBACK_TEXT,
    TERMINATION_REASONS,
    VISUAL_ACTION_KINDS,
    ApiNavAction,
    Feedback,
    InfoStack,
    Passage,
    RunConfig,
    RunResult,
    Task,
    TraceEvent,
    TraceRecorder,
    VisualNavAction,
    config_from_dict,
    default_config,
    is_absolute_url,
    parse_trace_line,
    read_trace,
    serialize_trace_event,
    validate_config,
    write_trace,
)
from .errors import (
    BackendUnavailable,
    ConfigError,
    ExtractionParseFailure,
    FatalBackendError,
    FetchFailure,
    FixtureError,
    GroundingFailure,
    JudgeParseFailure,
    MalformedDecision,
    NavigationParseFailure,
    NavigationTimeout,
    ScriptExhausted,
    SearchFailure,
    SkippedFile,
    StaleElement,
    WebGatherError,
)
from .evalharness import (
    ActionStats,
    DatasetExample,
    EvalReport,
    JudgeVerdict,
    RougeScores,
    evaluate_dataset,
    llm_judge,
    load_dataset,
    normalize_answer,
    rouge,
    string_accuracy,
    trace_stats,
)
from .extractor import (
    ExtractionRequest,
    chunk_page_text,
    extract_from_screenshots,
    extract_from_text,
)
from .jsontools import extract_json_object
from .navigator_api import ApiNavState, build_prompt, next_action, parse_tool_call
from .navigator_visual import (
    VisualObservation,
    detect_loop,
    generate_action_description,
    ground_action,
    parse_grounding,
    shortcut_action,
)
from .orchestrator import Engine, answer, run_and_answer, run_task
from .prompts import load_template, render_passage_list, render_template

__version__ = "0.1.0"

__all__ = [
    "ACCESS_MODES",
    "API_ACTION_KINDS",
    "ActionStats",
    "AggregatorDecision",
    "ApiNavAction",
    "ApiNavState",
    "BackendUnavailable",
    "BrowserDriver",
    "ConfigError",
    "DatasetExample",
    "ElementCandidate",
    "Engine",
    "EvalReport",
    "ExtractionParseFailure",
    "ExtractionRequest",
    "FatalBackendError",
    "Feedback",
    "FetchFailure",
    "FingerprintModelBackend",
    "FixtureBrowser",
    "FixtureError",
    "FixturePage",
    "FixtureScraper",
    "FixtureSearchProvider",
    "FixtureWeb",
    "GroundingFailure",
    "INITIAL_FEEDBACK_TEXT",
    "InfoStack",
    "JudgeParseFailure",
    "JudgeVerdict",
    "LiveModelBackend",
    "LiveScraper",
    "LiveSearchProvider",
    "MalformedDecision",
    "ModelBackend",
    "NavigationParseFailure",
    "NavigationTimeout",
    "PageElement",
    "PageScraper",
    "PageText",
    "Passage",
    "PlaywrightBrowser",
    "RecordedCall",
    "RougeScores",
    "RunConfig",
    "RunResult",
    "Screenshot",
    "ScreenshotCapture",
    "ScriptExhausted",
    "ScriptedModelBackend",
    "SearchFailure",
    "SearchProvider",
    "SearchResult",
    "SkippedFile",
    "StaleElement",
    "TERMINATION_REASONS",
    "Task",
    "TraceEvent",
    "TraceRecorder",
    "VISUAL_ACTION_KINDS",
    "VisualNavAction",
    "VisualObservation",
    "WebGatherError",
    "answer",
    "apply_actions",
    "build_prompt",
    "chunk_page_text",
    "config_from_dict",
    "default_config",
    "detect_loop",
    "evaluate_dataset",
    "extract_from_screenshots",
    "extract_from_text",
    "extract_json_object",
    "fixture_web_from_dict",
    "generate_action_description",
    "ground_action",
    "html_to_text",
    "is_absolute_url",
    "llm_judge",
    "load_dataset",
    "load_fixture_web",
    "load_template",
    "next_action",
    "normalize_answer",
    "parse_action_string",
    "parse_decision",
    "parse_grounding",
    "parse_tool_call",
    "parse_trace_line",
    "prompt_fingerprint",
    "read_trace",
    "render_passage_list",
    "render_template",
    "rouge",
    "run_and_answer",
    "run_task",
    "serialize_trace_event",
    "shortcut_action",
    "string_accuracy",
    "trace_stats",
    "update",
    "validate_config",
    "validate_fixture_web",
    "write_trace",
]
