"""Scoring, dataset evaluation, and trace statistics."""

from __future__ import annotations

import dataclasses
import json

import pytest

from webgather import (
    DatasetExample,
    JudgeParseFailure,
    ScriptedModelBackend,
    default_config,
    evaluate_dataset,
    llm_judge,
    load_dataset,
    normalize_answer,
    rouge,
    string_accuracy,
    trace_stats,
)

from conftest import build_engine, run_case
from e2e_cases import CASES_BY_ID, TITAN, P_API1, decision, paras, tool
from oracle_rouge import oracle_rouge_l, oracle_rouge_n


def test_normalize_answer():
    assert normalize_answer("The Answer Is: 42!") == "the answer is 42"
    assert normalize_answer("  a\tb\n c ") == "a b c"
    assert normalize_answer("") == ""
    assert normalize_answer("don't-stop") == "don t stop"


def test_string_accuracy_containment():
    assert string_accuracy("The answer is 42.", "42")
    assert string_accuracy("He was born in The Hague, Netherlands.", "the hague")
    assert not string_accuracy("He was born in Den Haag.", "The Hague")
    assert not string_accuracy("", "x")
    # empty gold is trivially contained; containment semantics, not a bug
    assert string_accuracy("anything", "")


def test_rouge_hand_computed_case():
    scores = rouge("the cat sat", "the cat sat on the mat")
    assert scores.rouge1.precision == pytest.approx(1.0)
    assert scores.rouge1.recall == pytest.approx(0.5)
    assert scores.rouge1_f == pytest.approx(2 / 3, abs=1e-4)
    assert scores.rouge2.precision == pytest.approx(1.0)
    assert scores.rouge2.recall == pytest.approx(0.4)
    assert scores.rouge2_f == pytest.approx(4 / 7, abs=1e-4)
    assert scores.rougeL_f == pytest.approx(2 / 3, abs=1e-4)


def test_rouge_identity_and_empty():
    scores = rouge("saturn has rings", "saturn has rings")
    assert (scores.rouge1_f, scores.rouge2_f, scores.rougeL_f) == (1.0, 1.0, 1.0)
    empty = rouge("", "saturn has rings")
    assert (empty.rouge1_f, empty.rouge2_f, empty.rougeL_f) == (0.0, 0.0, 0.0)


def test_rouge_single_token_has_no_bigrams():
    scores = rouge("cat", "cat")
    assert scores.rouge1_f == 1.0
    assert scores.rouge2_f == 0.0
    assert scores.rougeL_f == 1.0


def test_rouge_l_is_order_sensitive():
    scores = rouge("sat cat the", "the cat sat")
    assert scores.rouge1_f == pytest.approx(1.0)
    assert scores.rougeL_f == pytest.approx(1 / 3)


@pytest.mark.parametrize(
    ("predicted", "gold"),
    [
        ("the cat sat", "the cat sat on the mat"),
        ("alpha beta gamma alpha", "beta alpha gamma"),
        ("one two three four five", "three four five six"),
        ("repeated repeated repeated", "repeated"),
    ],
)
def test_rouge_matches_independent_oracle(predicted, gold):
    scores = rouge(predicted, gold)
    for n, variant in ((1, scores.rouge1), (2, scores.rouge2)):
        p, r, f = oracle_rouge_n(predicted, gold, n)
        assert variant.precision == pytest.approx(p, abs=1e-9)
        assert variant.recall == pytest.approx(r, abs=1e-9)
        assert variant.fmeasure == pytest.approx(f, abs=1e-9)
    p, r, f = oracle_rouge_l(predicted, gold)
    assert scores.rougeL.precision == pytest.approx(p, abs=1e-9)
    assert scores.rougeL.recall == pytest.approx(r, abs=1e-9)
    assert scores.rougeL.fmeasure == pytest.approx(f, abs=1e-9)


def judge_json(decision: str, explanation: str = "checked") -> str:
    return json.dumps({"Explanation": explanation, "Decision": decision})


def test_llm_judge_true_verdict():
    backend = ScriptedModelBackend([judge_json("TRUE", "present")])
    verdict = llm_judge("q?", "predicted text", "gold", backend=backend, model="j")
    assert verdict.decision is True
    assert verdict.explanation == "present"
    call = backend.calls[0]
    assert call.model == "j"
    assert call.response_mode == "json"
    assert "q?" in call.text
    assert "predicted text" in call.text
    assert "gold" in call.text


def test_llm_judge_decision_is_strict():
    for raw in ("FALSE", "true", "True"):
        backend = ScriptedModelBackend([judge_json(raw)])
        assert llm_judge("q", "p", "g", backend=backend).decision is False
    backend = ScriptedModelBackend([json.dumps({"Decision": True})])
    assert llm_judge("q", "p", "g", backend=backend).decision is False
    backend = ScriptedModelBackend([judge_json("  TRUE  ")])
    assert llm_judge("q", "p", "g", backend=backend).decision is True


def test_llm_judge_retries_then_parses():
    backend = ScriptedModelBackend(["garbage", judge_json("TRUE")])
    verdict = llm_judge("q", "p", "g", backend=backend)
    assert verdict.decision is True
    assert len(backend.calls) == 2
    assert "could not be parsed" in backend.calls[1].text


def test_llm_judge_raises_after_two_unusable_responses():
    backend = ScriptedModelBackend(["garbage", json.dumps({"verdict": "TRUE"})])
    with pytest.raises(JudgeParseFailure):
        llm_judge("q", "p", "g", backend=backend)


def test_load_dataset(tmp_path):
    path = tmp_path / "data.jsonl"
    path.write_text(
        '{"id": "a", "question": "q1", "answer": "g1", "reasoning_type": "single-hop"}\n'
        "\n"
        '{"id": 2, "question": "q2", "answer": "g2"}\n',
        encoding="utf-8",
    )
    examples = load_dataset(path)
    assert examples == [
        DatasetExample(id="a", question="q1", answer="g1", reasoning_type="single-hop"),
        DatasetExample(id="2", question="q2", answer="g2", reasoning_type=None),
    ]


def test_load_dataset_names_bad_line(tmp_path):
    path = tmp_path / "data.jsonl"
    path.write_text(
        '{"id": "a", "question": "q", "answer": "g"}\nnot json\n', encoding="utf-8"
    )
    with pytest.raises(ValueError, match="line 2"):
        load_dataset(path)
    path.write_text('{"id": "a", "question": "q"}\n', encoding="utf-8")
    with pytest.raises(ValueError, match="line 1"):
        load_dataset(path)


def test_bundled_dataset_loads():
    from conftest import DATASET_PATH

    examples = load_dataset(DATASET_PATH)
    assert len(examples) >= 10
    assert all(e.question and e.answer for e in examples)


# A tiny synthetic benchmark with one clean run, one budget-bound run,
# and one run whose backend dies. Aggregates are hand-computed.

EV_ANSWER_1 = "Titan was discovered by Christiaan Huygens."

EV_SCRIPTS = {
    "ev-1": (
        tool("Search for the discoverer.", "search", "titan moon saturn discoverer"),
        tool("Read the Titan page.", "aggregate", TITAN),
        paras(P_API1),
        decision(["ADD(0)"], "The discoverer is aggregated. You can terminate."),
        tool("Done.", "terminate", "found it"),
        EV_ANSWER_1,
    ),
    "ev-2": tuple(
        tool("Keep looking.", "search", f"unfindable fact attempt {i}")
        for i in range(6)
    ) + ("I could not find anything conclusive.",),
    "ev-3": (),
}

EV_DATASET = (
    '{"id": "ev-1", "question": "Who discovered Titan, the largest moon of Saturn?",'
    ' "answer": "Christiaan Huygens", "reasoning_type": "single-hop"}\n'
    '{"id": "ev-2", "question": "What is the unfindable fact?",'
    ' "answer": "unfindable", "reasoning_type": "multi-hop"}\n'
    '{"id": "ev-3", "question": "What will the dead backend answer?",'
    ' "answer": "nothing"}\n'
)


def ev_config():
    return dataclasses.replace(
        default_config("api"), max_steps=6, max_aggregations=2
    )


def ev_factory(web):
    def factory(example):
        return build_engine("api", EV_SCRIPTS[example.id], web)

    return factory


def write_ev_dataset(tmp_path):
    path = tmp_path / "ev.jsonl"
    path.write_text(EV_DATASET, encoding="utf-8")
    return path


def test_evaluate_dataset_aggregates(tmp_path, web):
    report = evaluate_dataset(
        write_ev_dataset(tmp_path), ev_config(), ev_factory(web), mode="api"
    )
    assert report.aggregates == {
        "count": 3,
        "failures": 1,
        "budget_hit": 1,
        "accuracy": 0.5,
    }
    assert [e["id"] for e in report.examples] == ["ev-1", "ev-2", "ev-3"]
    ev1, ev2, ev3 = report.examples
    assert ev1["correct"] is True
    assert ev1["predicted"] == EV_ANSWER_1
    assert ev1["termination_reason"] == "navigator_terminate"
    assert ev2["correct"] is False
    assert ev2["termination_reason"] == "step_budget"
    assert ev2["flags"] == ["budget"]
    assert ev3["failed"] is True
    assert "ScriptExhausted" in ev3["error"]
    assert "predicted" not in ev3


def test_evaluate_dataset_per_type(tmp_path, web):
    report = evaluate_dataset(
        write_ev_dataset(tmp_path), ev_config(), ev_factory(web), mode="api"
    )
    assert set(report.per_type) == {"single-hop", "multi-hop", "untyped"}
    assert report.per_type["single-hop"]["accuracy"] == 1.0
    assert report.per_type["multi-hop"]["accuracy"] == 0.0
    untyped = report.per_type["untyped"]
    assert untyped["count"] == 1
    assert untyped["failures"] == 1
    assert "accuracy" not in untyped


def test_evaluate_dataset_parallel_matches_serial(tmp_path, web):
    examples = load_dataset(write_ev_dataset(tmp_path))
    serial = evaluate_dataset(examples, ev_config(), ev_factory(web), parallel=1)
    threaded = evaluate_dataset(examples, ev_config(), ev_factory(web), parallel=2)
    assert serial.examples == threaded.examples
    assert serial.aggregates == threaded.aggregates


def test_evaluate_dataset_rouge_metric(tmp_path, web):
    report = evaluate_dataset(
        write_ev_dataset(tmp_path),
        ev_config(),
        ev_factory(web),
        metric="accuracy_rouge",
    )
    ev1 = report.examples[0]
    expected = rouge(EV_ANSWER_1, "Christiaan Huygens")
    assert ev1["rouge1_f"] == pytest.approx(expected.rouge1_f)
    assert ev1["rouge2_f"] == pytest.approx(expected.rouge2_f)
    assert ev1["rougeL_f"] == pytest.approx(expected.rougeL_f)
    # means are over scored examples only; the failed run has no scores
    assert report.aggregates["rouge1_f"] == pytest.approx(
        (ev1["rouge1_f"] + report.examples[1]["rouge1_f"]) / 2
    )


def test_evaluate_dataset_judge_metric(web):
    turns = list(EV_SCRIPTS["ev-1"]) + [judge_json("TRUE", "contains the gold answer")]
    examples = [DatasetExample(id="j-1", question="Who discovered Titan?", answer="x")]
    report = evaluate_dataset(
        examples,
        ev_config(),
        lambda example: build_engine("api", turns, web),
        metric="judge",
    )
    record = report.examples[0]
    # judged true although string containment would fail
    assert record["correct"] is True
    assert record["judge_explanation"] == "contains the gold answer"


def test_evaluate_dataset_judge_parse_failure_scores_false(web):
    turns = list(EV_SCRIPTS["ev-1"]) + ["bad", "still bad"]
    examples = [DatasetExample(id="j-2", question="q", answer="g")]
    report = evaluate_dataset(
        examples,
        ev_config(),
        lambda example: build_engine("api", turns, web),
        metric="judge",
    )
    record = report.examples[0]
    assert record["correct"] is False
    assert "judge_error" in record


def test_evaluate_dataset_rejects_unknown_metric(web):
    with pytest.raises(ValueError, match="metric"):
        evaluate_dataset([], ev_config(), ev_factory(web), metric="bleu")


def test_report_files_round_trip(tmp_path, web):
    report = evaluate_dataset(
        write_ev_dataset(tmp_path), ev_config(), ev_factory(web)
    )
    out = tmp_path / "nested" / "report.json"
    report.write_json(out)
    loaded = json.loads(out.read_text(encoding="utf-8"))
    assert loaded == report.to_json_dict()
    predictions = tmp_path / "predictions.jsonl"
    report.write_predictions(predictions)
    lines = [json.loads(l) for l in predictions.read_text().splitlines()]
    assert lines == [
        {"id": "ev-1", "answer": EV_ANSWER_1},
        {"id": "ev-2", "answer": "I could not find anything conclusive."},
        {"id": "ev-3", "answer": ""},
    ]


def test_trace_stats_over_eval_traces(tmp_path, web):
    trace_dir = tmp_path / "traces"
    evaluate_dataset(
        write_ev_dataset(tmp_path), ev_config(), ev_factory(web), trace_dir=trace_dir
    )
    assert sorted(p.name for p in trace_dir.glob("*.jsonl")) == [
        "ev-1.jsonl", "ev-2.jsonl", "ev-3.jsonl",
    ]
    stats = trace_stats(trace_dir)
    assert stats.run_count == 3
    assert stats.termination_success_rate == pytest.approx(1 / 3)
    assert stats.mean_actions["SEARCH"] == pytest.approx(7 / 3)
    assert stats.mean_actions["AGGREGATE"] == pytest.approx(1 / 3)
    assert stats.mean_actions["TERMINATE"] == pytest.approx(1 / 3)
    assert stats.mean_actions["CLICK"] == 0.0
    assert stats.skipped_files == ()


def test_trace_stats_empty_directory(tmp_path):
    stats = trace_stats(tmp_path)
    assert stats.run_count == 0
    assert stats.termination_success_rate == 0.0
    assert all(value == 0.0 for value in stats.mean_actions.values())


def test_trace_stats_skips_unparseable_files(tmp_path, web):
    run_case(CASES_BY_ID["api-1"], web, trace_path=tmp_path / "good.jsonl")
    (tmp_path / "bad.jsonl").write_text("not json\n", encoding="utf-8")
    stats = trace_stats(tmp_path)
    assert stats.run_count == 1
    assert stats.skipped_files == ("bad.jsonl",)
    assert stats.termination_success_rate == 1.0
