"""Evaluation: answer scoring, dataset runs, and trace statistics.

Three scorers cover the dataset conventions this package targets:
exact-containment string accuracy, ROUGE-1/2/L F-measures, and an
LLM judge that compares a predicted answer against the gold answer.
All text normalization is shared: lowercase, punctuation to spaces,
whitespace collapsed. ROUGE works on whitespace tokens of the
normalized strings, without stemming.

``evaluate_dataset`` runs every example end to end (run, answer, score)
with per-example isolation: one example's failure is recorded in the
report, never fatal to the rest. ``trace_stats`` summarizes a directory
of trace files into per-action means and a termination-success rate.
"""

from __future__ import annotations

import json
import string
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Iterable, Sequence

from .backends.model import ModelBackend
from .core import (
    API_ACTION_KINDS,
    RunConfig,
    Task,
    TraceEvent,
    VISUAL_ACTION_KINDS,
    read_trace,
)
from .errors import JudgeParseFailure, SkippedFile
from .jsontools import extract_json_object
from .orchestrator import Engine, run_and_answer
from .prompts import render_template

METRICS = ("accuracy", "accuracy_rouge", "judge")

ACTION_KINDS = tuple(dict.fromkeys(API_ACTION_KINDS + VISUAL_ACTION_KINDS))

_PUNCT_TABLE = str.maketrans({ch: " " for ch in string.punctuation})

JUDGE_CORRECTIVE_SUFFIX = (
    "\n\nYour previous response could not be parsed. Respond with only the JSON "
    "object in the format given above."
)


def normalize_answer(text: str) -> str:
    """Lowercase, punctuation to spaces, whitespace collapsed."""
    return " ".join(text.lower().translate(_PUNCT_TABLE).split())


def string_accuracy(predicted: str, gold: str) -> bool:
    """True when the normalized gold answer appears in the normalized
    prediction: ("the answer is 42.", "42") counts as correct."""
    return normalize_answer(gold) in normalize_answer(predicted)


@dataclass(frozen=True)
class RougeVariant:
    precision: float
    recall: float
    fmeasure: float


@dataclass(frozen=True)
class RougeScores:
    rouge1: RougeVariant
    rouge2: RougeVariant
    rougeL: RougeVariant

    @property
    def rouge1_f(self) -> float:
        return self.rouge1.fmeasure

    @property
    def rouge2_f(self) -> float:
        return self.rouge2.fmeasure

    @property
    def rougeL_f(self) -> float:
        return self.rougeL.fmeasure


def _tokens(text: str) -> list[str]:
    return normalize_answer(text).split()


def _ngrams(tokens: Sequence[str], n: int) -> list[tuple[str, ...]]:
    return [tuple(tokens[i : i + n]) for i in range(len(tokens) - n + 1)]


def _prf(match: int, pred_total: int, gold_total: int) -> RougeVariant:
    precision = match / pred_total if pred_total else 0.0
    recall = match / gold_total if gold_total else 0.0
    denominator = precision + recall
    fmeasure = 2 * precision * recall / denominator if denominator else 0.0
    return RougeVariant(precision, recall, fmeasure)


def _ngram_overlap(pred: Sequence[str], gold: Sequence[str], n: int) -> RougeVariant:
    pred_ngrams = Counter(_ngrams(pred, n))
    gold_ngrams = Counter(_ngrams(gold, n))
    match = sum(min(count, gold_ngrams[gram]) for gram, count in pred_ngrams.items())
    return _prf(match, sum(pred_ngrams.values()), sum(gold_ngrams.values()))


def _lcs_length(a: Sequence[str], b: Sequence[str]) -> int:
    if not a or not b:
        return 0
    previous = [0] * (len(b) + 1)
    for token_a in a:
        current = [0] * (len(b) + 1)
        for j, token_b in enumerate(b, start=1):
            if token_a == token_b:
                current[j] = previous[j - 1] + 1
            else:
                current[j] = max(previous[j], current[j - 1])
        previous = current
    return previous[-1]


def rouge(predicted: str, gold: str) -> RougeScores:
    """ROUGE-1, ROUGE-2, and ROUGE-L over normalized whitespace tokens.

    N-gram variants use clipped multiset overlap; ROUGE-L uses the
    longest common subsequence. Strings shorter than n tokens have an
    empty n-gram multiset and score 0 on that variant.
    """
    pred_tokens = _tokens(predicted)
    gold_tokens = _tokens(gold)
    lcs = _lcs_length(pred_tokens, gold_tokens)
    return RougeScores(
        rouge1=_ngram_overlap(pred_tokens, gold_tokens, 1),
        rouge2=_ngram_overlap(pred_tokens, gold_tokens, 2),
        rougeL=_prf(lcs, len(pred_tokens), len(gold_tokens)),
    )


@dataclass(frozen=True)
class JudgeVerdict:
    decision: bool
    explanation: str


def llm_judge(
    question: str,
    predicted: str,
    gold: str,
    *,
    backend: ModelBackend,
    model: str = "default",
) -> JudgeVerdict:
    """Ask the judge model whether the gold answer is present.

    The decision is true only when the "Decision" field equals "TRUE"
    case-sensitively after trimming. One corrective retry; then
    JudgeParseFailure.
    """
    prompt = render_template("judge", question=question, predicted=predicted, answer=gold)
    raw = backend.complete(prompt, model=model, response_mode="json")
    parsed = extract_json_object(raw)
    if parsed is None or "Decision" not in parsed:
        raw = backend.complete(
            prompt + JUDGE_CORRECTIVE_SUFFIX, model=model, response_mode="json"
        )
        parsed = extract_json_object(raw)
        if parsed is None or "Decision" not in parsed:
            raise JudgeParseFailure(
                f"judge output had no usable Decision field: {raw[:200]!r}"
            )
    decision_field = parsed["Decision"]
    decision = isinstance(decision_field, str) and decision_field.strip() == "TRUE"
    return JudgeVerdict(
        decision=decision, explanation=str(parsed.get("Explanation", ""))
    )


@dataclass(frozen=True)
class DatasetExample:
    id: str
    question: str
    answer: str
    reasoning_type: str | None = None


def load_dataset(path: str | Path) -> list[DatasetExample]:
    """JSONL with {"id", "question", "answer"} and optional
    "reasoning_type" per line."""
    examples = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line_number, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
                examples.append(
                    DatasetExample(
                        id=str(raw["id"]),
                        question=str(raw["question"]),
                        answer=str(raw["answer"]),
                        reasoning_type=(
                            str(raw["reasoning_type"])
                            if raw.get("reasoning_type") is not None
                            else None
                        ),
                    )
                )
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(
                    f"bad dataset line {line_number} in {path}: {exc}"
                ) from exc
    return examples


@dataclass
class EvalReport:
    aggregates: dict[str, Any]
    per_type: dict[str, dict[str, Any]]
    examples: list[dict[str, Any]]

    def to_json_dict(self) -> dict[str, Any]:
        return {
            "aggregates": self.aggregates,
            "per_type": self.per_type,
            "examples": self.examples,
        }

    def write_json(self, path: str | Path) -> None:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(
            json.dumps(self.to_json_dict(), indent=2, ensure_ascii=False) + "\n",
            encoding="utf-8",
        )

    def write_predictions(self, path: str | Path) -> None:
        """Predictions as JSONL {"id", "answer"} lines."""
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with Path(path).open("w", encoding="utf-8") as fh:
            for example in self.examples:
                fh.write(
                    json.dumps(
                        {"id": example["id"], "answer": example.get("predicted", "")},
                        ensure_ascii=False,
                    )
                    + "\n"
                )


def _evaluate_one(
    example: DatasetExample,
    config: RunConfig,
    engine_factory: Callable[[DatasetExample], Engine],
    mode: str,
    metric: str,
    trace_dir: Path | None,
) -> dict[str, Any]:
    record: dict[str, Any] = {
        "id": example.id,
        "question": example.question,
        "gold": example.answer,
        "reasoning_type": example.reasoning_type,
        "flags": [],
    }
    try:
        engine = engine_factory(example)
        task = Task(
            id=example.id,
            query=example.question,
            access_mode=mode,
            gold_answer=example.answer,
            reasoning_type=example.reasoning_type,
        )
        trace_path = trace_dir / f"{example.id}.jsonl" if trace_dir else None
        result = run_and_answer(task, config, engine, trace_path=trace_path)
    except Exception as exc:
        record["failed"] = True
        record["error"] = f"{type(exc).__name__}: {exc}"
        return record
    predicted = result.answer or ""
    record["predicted"] = predicted
    record["termination_reason"] = result.termination_reason
    record["steps_used"] = result.steps_used
    record["aggregations_used"] = result.aggregations_used
    record["stack_size"] = len(result.stack)
    if result.termination_reason in ("step_budget", "aggregate_budget"):
        # the run hit a budget; the answer came from whatever was
        # aggregated (possibly nothing, i.e. the closed-book path)
        record["flags"] = ["budget"]
    if metric in ("accuracy", "accuracy_rouge"):
        record["correct"] = string_accuracy(predicted, example.answer)
    if metric == "accuracy_rouge":
        scores = rouge(predicted, example.answer)
        record["rouge1_f"] = scores.rouge1_f
        record["rouge2_f"] = scores.rouge2_f
        record["rougeL_f"] = scores.rougeL_f
    if metric == "judge":
        try:
            verdict = llm_judge(
                example.question,
                predicted,
                example.answer,
                backend=engine.model,
                model=config.model_for("judge"),
            )
            record["correct"] = verdict.decision
            record["judge_explanation"] = verdict.explanation
        except JudgeParseFailure as exc:
            record["correct"] = False
            record["judge_error"] = str(exc)
    return record


def _aggregate(records: list[dict[str, Any]]) -> dict[str, Any]:
    aggregates: dict[str, Any] = {
        "count": len(records),
        "failures": sum(1 for r in records if r.get("failed")),
        "budget_hit": sum(1 for r in records if "budget" in r.get("flags", [])),
    }
    scored = [r for r in records if "correct" in r]
    if scored:
        aggregates["accuracy"] = sum(r["correct"] for r in scored) / len(scored)
    for key in ("rouge1_f", "rouge2_f", "rougeL_f"):
        values = [r[key] for r in records if key in r]
        if values:
            aggregates[key] = sum(values) / len(values)
    return aggregates


def evaluate_dataset(
    examples: Iterable[DatasetExample] | str | Path,
    config: RunConfig,
    engine_factory: Callable[[DatasetExample], Engine],
    *,
    mode: str = "api",
    metric: str = "accuracy",
    parallel: int = 1,
    trace_dir: str | Path | None = None,
) -> EvalReport:
    """Run and score a dataset; one report with per-type aggregates.

    ``engine_factory`` builds one isolated Engine per example, so
    scripted backends never interleave across examples even with
    ``parallel`` > 1. Example order in the report matches input order.
    """
    if metric not in METRICS:
        raise ValueError(f"metric must be one of {METRICS}, got {metric!r}")
    if isinstance(examples, (str, Path)):
        examples = load_dataset(examples)
    examples = list(examples)
    trace_dir_path = Path(trace_dir) if trace_dir is not None else None
    if trace_dir_path is not None:
        trace_dir_path.mkdir(parents=True, exist_ok=True)

    def work(example: DatasetExample) -> dict[str, Any]:
        return _evaluate_one(
            example, config, engine_factory, mode, metric, trace_dir_path
        )

    if parallel > 1:
        with ThreadPoolExecutor(max_workers=parallel) as pool:
            records = list(pool.map(work, examples))
    else:
        records = [work(example) for example in examples]

    per_type: dict[str, dict[str, Any]] = {}
    for type_name in sorted(
        {r["reasoning_type"] or "untyped" for r in records}
    ):
        group = [r for r in records if (r["reasoning_type"] or "untyped") == type_name]
        per_type[type_name] = _aggregate(group)
    return EvalReport(
        aggregates=_aggregate(records), per_type=per_type, examples=records
    )


@dataclass(frozen=True)
class ActionStats:
    """Per-action mean counts per run plus the termination-success rate
    (the fraction of runs that ended with navigator_terminate)."""

    run_count: int
    mean_actions: dict[str, float] = field(default_factory=dict)
    termination_success_rate: float = 0.0
    skipped_files: tuple[str, ...] = ()


def _read_trace_or_skip(path: Path) -> list[TraceEvent]:
    try:
        return read_trace(path)
    except Exception as exc:
        raise SkippedFile(f"unparseable trace file {path.name}: {exc}") from exc


def trace_stats(trace_dir: str | Path) -> ActionStats:
    """Summarize every ``*.jsonl`` trace in a directory.

    Unparseable files are skipped and listed, never fatal. An empty
    directory yields zero stats with run_count 0.
    """
    directory = Path(trace_dir)
    runs: list[tuple[Counter, str | None]] = []
    skipped: list[str] = []
    for path in sorted(directory.glob("*.jsonl")):
        try:
            events = _read_trace_or_skip(path)
        except SkippedFile:
            skipped.append(path.name)
            continue
        counts = Counter(
            event.kind
            for event in events
            if event.actor == "navigator" and event.kind in ACTION_KINDS
        )
        reason = None
        for event in events:
            if event.actor == "orchestrator" and event.kind == "run_end":
                reason = event.payload.get("termination_reason")
        runs.append((counts, reason))
    run_count = len(runs)
    mean_actions = {
        kind: (
            sum(counts[kind] for counts, _reason in runs) / run_count
            if run_count
            else 0.0
        )
        for kind in ACTION_KINDS
    }
    successes = sum(1 for _counts, reason in runs if reason == "navigator_terminate")
    return ActionStats(
        run_count=run_count,
        mean_actions=mean_actions,
        termination_success_rate=successes / run_count if run_count else 0.0,
        skipped_files=tuple(skipped),
    )
