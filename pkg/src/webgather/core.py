"""Domain types, run configuration, and the trace event model.

Everything here is an immutable value object: construction validates, and
all evolution happens by building new values. The trace is the only
append-only artifact; :class:`TraceRecorder` owns it and flushes each
event to disk as one JSON line so a crashed run still leaves a readable
record.
"""

from __future__ import annotations

import dataclasses
import io
import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Any, Iterable, Iterator
from urllib.parse import urlparse

from .errors import ConfigError

ACCESS_MODES = ("api", "visual")

# Navigator action vocabularies, one per access setting. AGGREGATE and
# TERMINATE are shared; everything else belongs to exactly one setting.
API_ACTION_KINDS = ("SEARCH", "AGGREGATE", "TERMINATE")
VISUAL_ACTION_KINDS = (
    "CLICK",
    "SELECT",
    "TYPE",
    "PRESS_ENTER",
    "GO_BACK",
    "AGGREGATE",
    "TERMINATE",
)

TERMINATION_REASONS = (
    "navigator_terminate",
    "aggregate_budget",
    "step_budget",
    "fatal_error",
)

#: Feedback text used before the first aggregation has produced any.
INITIAL_FEEDBACK_TEXT = "None"


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise ValueError(message)


def is_absolute_url(url: str) -> bool:
    """True when the url has both a scheme and a network location."""
    parsed = urlparse(url)
    return bool(parsed.scheme) and bool(parsed.netloc)


@dataclass(frozen=True)
class Task:
    """One information-gathering request.

    ``access_mode`` selects the navigator family: ``api`` drives a search
    tool directly, ``visual`` drives a browser through screenshots.
    """

    id: str
    query: str
    access_mode: str = "api"
    gold_answer: str | None = None
    reasoning_type: str | None = None

    def __post_init__(self) -> None:
        _require(bool(self.id.strip()), "task id must be non-empty")
        _require(bool(self.query.strip()), "task query must be non-empty")
        _require(
            self.access_mode in ACCESS_MODES,
            f"access_mode must be one of {ACCESS_MODES}, got {self.access_mode!r}",
        )


@dataclass(frozen=True)
class Passage:
    """A unit of extracted information attributed to its source page."""

    text: str
    source_url: str
    step_extracted: int

    def __post_init__(self) -> None:
        _require(bool(self.text.strip()), "passage text must be non-empty")
        _require(
            is_absolute_url(self.source_url),
            f"passage source_url must be absolute, got {self.source_url!r}",
        )
        _require(self.step_extracted >= 0, "step_extracted must be >= 0")

    @property
    def key(self) -> tuple[str, str]:
        """Identity used for duplicate detection: (text, source_url)."""
        return (self.text, self.source_url)


@dataclass(frozen=True)
class InfoStack:
    """The bounded collection of aggregated passages.

    Holds at most ``capacity`` items and never two passages with the same
    (text, source_url) pair. Instances are immutable; the aggregator
    builds new stacks when it applies its decisions.
    """

    items: tuple[Passage, ...] = ()
    capacity: int = 5

    def __post_init__(self) -> None:
        _require(self.capacity > 0, "capacity must be positive")
        _require(
            len(self.items) <= self.capacity,
            f"stack holds {len(self.items)} items, capacity is {self.capacity}",
        )
        keys = [p.key for p in self.items]
        _require(
            len(keys) == len(set(keys)),
            "stack must not contain duplicate (text, source_url) passages",
        )

    def __len__(self) -> int:
        return len(self.items)

    def __iter__(self) -> Iterator[Passage]:
        return iter(self.items)

    @property
    def is_full(self) -> bool:
        return len(self.items) >= self.capacity

    def keys(self) -> set[tuple[str, str]]:
        return {p.key for p in self.items}

    def with_added(self, passage: Passage) -> "InfoStack":
        """New stack with ``passage`` appended; validation re-runs."""
        return InfoStack(self.items + (passage,), self.capacity)

    def with_replaced(self, index: int, passage: Passage) -> "InfoStack":
        """New stack with the item at ``index`` swapped for ``passage``."""
        items = list(self.items)
        items[index] = passage
        return InfoStack(tuple(items), self.capacity)


@dataclass(frozen=True)
class Feedback:
    """Aggregator guidance routed back to the navigator."""

    text: str
    iterations_remaining: int
    terminate_requested: bool = False

    def __post_init__(self) -> None:
        _require(bool(self.text), "feedback text must be non-empty")
        _require(self.iterations_remaining >= 0, "iterations_remaining must be >= 0")

    @classmethod
    def initial(cls, max_aggregations: int) -> "Feedback":
        """The feedback value a run starts with, before any aggregation."""
        return cls(
            text=INITIAL_FEEDBACK_TEXT,
            iterations_remaining=max_aggregations,
            terminate_requested=False,
        )


@dataclass(frozen=True)
class ApiNavAction:
    """Navigator action in the direct API setting.

    ``value`` is the query for SEARCH, the url for AGGREGATE, and the
    closing message for TERMINATE.
    """

    kind: str
    value: str = ""

    def __post_init__(self) -> None:
        _require(
            self.kind in API_ACTION_KINDS,
            f"api action kind must be one of {API_ACTION_KINDS}, got {self.kind!r}",
        )


@dataclass(frozen=True)
class VisualNavAction:
    """Navigator action in the interactive visual setting."""

    kind: str
    element_index: int | None = None
    text: str | None = None
    option: str | None = None

    def __post_init__(self) -> None:
        _require(
            self.kind in VISUAL_ACTION_KINDS,
            f"visual action kind must be one of {VISUAL_ACTION_KINDS}, got {self.kind!r}",
        )


def _default_component_models() -> dict[str, str]:
    return {}


@dataclass(frozen=True)
class RunConfig:
    """Budgets and knobs for one run.

    ``max_aggregations`` bounds how many times the extractor/aggregator
    pair may fire; ``max_steps`` bounds navigator timesteps. A run always
    halts once either budget is spent.
    """

    max_aggregations: int = 5
    max_steps: int = 15
    capacity: int = 5
    max_passages_per_page: int = 2
    domain_filter: str | None = None
    component_models: dict[str, str] = field(default_factory=_default_component_models)
    random_seed: int = 0
    max_page_chars: int = 24000
    max_screenshots: int = 10

    def model_for(self, component: str) -> str:
        return self.component_models.get(component, "default")


def default_config(access_mode: str) -> RunConfig:
    """Documented per-mode defaults.

    The api setting reads page text and keeps at most 2 passages per page
    over 15 steps; the visual setting reads screenshots and keeps at most
    4 passages per page over 20 steps.
    """
    if access_mode == "api":
        return RunConfig(max_steps=15, max_passages_per_page=2)
    if access_mode == "visual":
        return RunConfig(max_steps=20, max_passages_per_page=4)
    raise ConfigError(f"access_mode must be one of {ACCESS_MODES}, got {access_mode!r}")


def validate_config(config: RunConfig) -> RunConfig:
    """Check every field; raise ConfigError naming the first violated one."""
    k = config.max_aggregations
    if not isinstance(k, int) or isinstance(k, bool) or k < 0:
        raise ConfigError(f"max_aggregations must be a non-negative integer, got {k!r}")
    positive = (
        ("max_steps", config.max_steps),
        ("capacity", config.capacity),
        ("max_passages_per_page", config.max_passages_per_page),
        ("max_page_chars", config.max_page_chars),
        ("max_screenshots", config.max_screenshots),
    )
    for name, value in positive:
        if not isinstance(value, int) or isinstance(value, bool) or value <= 0:
            raise ConfigError(f"{name} must be a positive integer, got {value!r}")
    if config.max_aggregations > config.max_steps:
        raise ConfigError(
            "max_aggregations must not exceed max_steps "
            f"({config.max_aggregations} > {config.max_steps})"
        )
    if config.domain_filter is not None and not config.domain_filter.strip():
        raise ConfigError("domain_filter must be None or a non-empty hostname suffix")
    if not isinstance(config.component_models, dict):
        raise ConfigError("component_models must be a mapping of component to model id")
    if not isinstance(config.random_seed, int) or isinstance(config.random_seed, bool):
        raise ConfigError(f"random_seed must be an integer, got {config.random_seed!r}")
    return config


def config_from_dict(raw: dict[str, Any], base: RunConfig | None = None) -> RunConfig:
    """Build a RunConfig from a JSON-style dict, over a base config.

    Unknown keys are rejected so typos in config files fail loudly.
    """
    base = base if base is not None else RunConfig()
    known = {f.name for f in dataclasses.fields(RunConfig)}
    unknown = set(raw) - known
    if unknown:
        raise ConfigError(f"unknown config field: {sorted(unknown)[0]}")
    merged = dataclasses.replace(base, **raw)
    return validate_config(merged)


@dataclass(frozen=True)
class TraceEvent:
    """One step of the run record.

    ``t`` is the navigator timestep the event belongs to and never
    decreases along a trace. The serialized form adds a wall-clock
    timestamp; the in-memory value stays timestamp-free so replays of the
    same run compare equal.
    """

    t: int
    actor: str
    kind: str
    payload: dict[str, Any] = field(default_factory=dict)
    outcome: str = "ok"
    error_detail: str | None = None

    def __post_init__(self) -> None:
        _require(self.t >= 0, "trace event t must be >= 0")
        _require(bool(self.actor), "trace event actor must be non-empty")
        _require(bool(self.kind), "trace event kind must be non-empty")

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "t": self.t,
            "actor": self.actor,
            "kind": self.kind,
            "payload": self.payload,
            "outcome": self.outcome,
            "error_detail": self.error_detail,
        }

    @classmethod
    def from_json_dict(cls, raw: dict[str, Any]) -> "TraceEvent":
        return cls(
            t=raw["t"],
            actor=raw["actor"],
            kind=raw["kind"],
            payload=raw.get("payload") or {},
            outcome=raw.get("outcome", "ok"),
            error_detail=raw.get("error_detail"),
        )


class TraceRecorder:
    """Collects trace events and streams them to a JSONL file.

    Events are buffered in memory for the RunResult and, when a path is
    given, written and flushed one line at a time. ``t`` must never
    decrease across emitted events.
    """

    def __init__(self, path: str | Path | None = None) -> None:
        self.events: list[TraceEvent] = []
        self._last_t = 0
        self._fh: io.TextIOBase | None = None
        if path is not None:
            p = Path(path)
            p.parent.mkdir(parents=True, exist_ok=True)
            self._fh = p.open("w", encoding="utf-8")

    def emit(
        self,
        t: int,
        actor: str,
        kind: str,
        payload: dict[str, Any] | None = None,
        outcome: str = "ok",
        error_detail: str | None = None,
    ) -> TraceEvent:
        if t < self._last_t:
            raise ValueError(f"trace timestep went backwards: {t} < {self._last_t}")
        self._last_t = t
        event = TraceEvent(t, actor, kind, payload or {}, outcome, error_detail)
        self.events.append(event)
        if self._fh is not None:
            self._fh.write(serialize_trace_event(event) + "\n")
            self._fh.flush()
        return event

    def close(self) -> None:
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self) -> "TraceRecorder":
        return self

    def __exit__(self, *exc: object) -> None:
        self.close()


def serialize_trace_event(event: TraceEvent) -> str:
    """One JSON line per event; the writer stamps an ISO-8601 UTC time."""
    record = event.to_json_dict()
    record["timestamp"] = datetime.now(timezone.utc).isoformat()
    return json.dumps(record, ensure_ascii=False, sort_keys=True)


def parse_trace_line(line: str) -> TraceEvent:
    return TraceEvent.from_json_dict(json.loads(line))


def write_trace(events: Iterable[TraceEvent], path: str | Path) -> None:
    p = Path(path)
    p.parent.mkdir(parents=True, exist_ok=True)
    with p.open("w", encoding="utf-8") as fh:
        for event in events:
            fh.write(serialize_trace_event(event) + "\n")


def read_trace(path: str | Path) -> list[TraceEvent]:
    events = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                events.append(parse_trace_line(line))
    return events


@dataclass(frozen=True)
class RunResult:
    """Everything a finished run hands back."""

    stack: InfoStack
    answer: str | None
    trace: tuple[TraceEvent, ...]
    steps_used: int
    aggregations_used: int
    termination_reason: str

    def __post_init__(self) -> None:
        _require(
            self.termination_reason in TERMINATION_REASONS,
            f"termination_reason must be one of {TERMINATION_REASONS}, "
            f"got {self.termination_reason!r}",
        )
