"""Command-line interface: run one task, evaluate a dataset, inspect traces.

Four commands::

    webgather run --task "..." --mode api --fixture web.json --script turns.json
    webgather eval --dataset data.jsonl --mode api --fixture web.json \
        --scripts turns_by_id.json --out report.json
    webgather trace-stats TRACE_DIR
    webgather fixtures-validate web.json

Exit codes: 0 on success, 1 on usage errors (bad flags, missing files,
missing credentials), 2 on run or eval failure.

Configuration is one JSON document mirroring RunConfig; command-line
flags override file values. Environment variables carry credentials
only: SEARCH_API_KEY (and optional SEARCH_API_BASE) for live search,
MODEL_API_KEY (and optional MODEL_API_BASE) for the live model backend.
With ``--fixture`` everything is deterministic and offline: the model is
a scripted backend replaying the turns file, search and pages come from
the fixture web.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any

from .backends.browser import FixtureBrowser, PlaywrightBrowser
from .backends.fixtures import FixtureWeb, load_fixture_web, validate_fixture_web
from .backends.model import LiveModelBackend, ScriptedModelBackend
from .backends.scrape import FixtureScraper, LiveScraper
from .backends.search import FixtureSearchProvider, LiveSearchProvider
from .core import RunConfig, Task, config_from_dict, default_config
from .errors import BackendUnavailable, ConfigError, FixtureError
from .evalharness import METRICS, evaluate_dataset, trace_stats
from .orchestrator import Engine, run_and_answer

PROG = "webgather"


class UsageError(Exception):
    """Raised for problems with the invocation itself; exits with 1."""


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad flags; the contract here reserves 2
    # for run/eval failures, so usage problems become exceptions instead
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog=PROG, description=__doc__.split("\n\n")[0])
    commands = parser.add_subparsers(dest="command", metavar="command")

    run = commands.add_parser("run", parents=[], help="run one task and print the answer")
    run.add_argument("--task", required=True, help="the information-gathering request")
    run.add_argument("--mode", choices=("api", "visual"), default="api")
    run.add_argument("--task-id", default="cli-task", help="task id used in the trace")
    run.add_argument("--config", help="JSON config file mirroring RunConfig")
    run.add_argument("--fixture", help="fixture web JSON; enables offline mode")
    run.add_argument("--script", help="JSON list of scripted model turns (fixture mode)")
    run.add_argument(
        "--home-url",
        help="start page: a fixture page url, or the live start page in visual mode",
    )
    run.add_argument("--trace", default="trace.jsonl", help="trace output path")
    _add_config_overrides(run)

    evl = commands.add_parser("eval", help="run and score a dataset")
    evl.add_argument("--dataset", required=True, help="JSONL with id/question/answer")
    evl.add_argument("--mode", choices=("api", "visual"), default="api")
    evl.add_argument("--metric", choices=METRICS, default="accuracy")
    evl.add_argument("--config", help="JSON config file mirroring RunConfig")
    evl.add_argument("--fixture", help="fixture web JSON; enables offline mode")
    evl.add_argument(
        "--scripts", help="JSON object mapping example id to its model turns"
    )
    evl.add_argument("--home-url", help="start page for visual fixture runs")
    evl.add_argument("--out", help="write the full report JSON here")
    evl.add_argument("--predictions", help="write predictions JSONL here")
    evl.add_argument("--trace-dir", help="write one trace file per example here")
    evl.add_argument("--parallel", type=int, default=1, metavar="N")
    _add_config_overrides(evl)

    stats = commands.add_parser("trace-stats", help="summarize a directory of traces")
    stats.add_argument("trace_dir", metavar="DIR")

    fixval = commands.add_parser(
        "fixtures-validate", help="check a fixture web file's invariants"
    )
    fixval.add_argument("fixture", metavar="PATH")

    return parser


def _add_config_overrides(command: argparse.ArgumentParser) -> None:
    command.add_argument("--max-steps", type=int, dest="max_steps")
    command.add_argument("--max-aggregations", type=int, dest="max_aggregations")
    command.add_argument("--capacity", type=int, dest="capacity")
    command.add_argument(
        "--max-passages-per-page", type=int, dest="max_passages_per_page"
    )
    command.add_argument("--domain-filter", dest="domain_filter")
    command.add_argument("--seed", type=int, dest="random_seed")


def _require_file(path: str | None, flag: str) -> Path:
    if path is None:
        raise UsageError(f"{flag} is required for this invocation")
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"{flag} file not found: {path}")
    return p


def _load_config(args: argparse.Namespace, mode: str) -> RunConfig:
    config = default_config(mode)
    if args.config is not None:
        path = _require_file(args.config, "--config")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"--config file is not valid JSON: {exc}") from exc
        if not isinstance(raw, dict):
            raise UsageError("--config file must hold a JSON object")
        try:
            config = config_from_dict(raw, config)
        except ConfigError as exc:
            raise UsageError(f"--config: {exc}") from exc
    overrides = {
        name: getattr(args, name)
        for name in (
            "max_steps",
            "max_aggregations",
            "capacity",
            "max_passages_per_page",
            "domain_filter",
            "random_seed",
        )
        if getattr(args, name, None) is not None
    }
    if overrides:
        try:
            config = config_from_dict(overrides, config)
        except ConfigError as exc:
            raise UsageError(str(exc)) from exc
    return config


def _load_script_turns(path: Path) -> list[str]:
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise UsageError(f"--script file is not valid JSON: {exc}") from exc
    if not isinstance(raw, list) or not all(isinstance(t, str) for t in raw):
        raise UsageError("--script file must hold a JSON list of strings")
    return raw


def _fixture_home_url(web: FixtureWeb, requested: str | None) -> str:
    if requested is not None:
        if requested not in web.pages:
            raise UsageError(f"--home-url {requested!r} is not a fixture page")
        return requested
    return next(iter(web.pages))


def _fixture_engine(
    web: FixtureWeb, mode: str, turns: list[str], home_url: str | None
) -> Engine:
    model = ScriptedModelBackend(list(turns))
    if mode == "api":
        return Engine(
            model=model,
            search=FixtureSearchProvider(web),
            scraper=FixtureScraper(web),
        )
    browser = FixtureBrowser(web, _fixture_home_url(web, home_url))
    return Engine(model=model, browser=browser)


def _live_engine(mode: str, home_url: str | None) -> Engine:
    try:
        model = LiveModelBackend.from_env()
        if mode == "api":
            return Engine(
                model=model,
                search=LiveSearchProvider.from_env(),
                scraper=LiveScraper(),
            )
        if home_url is None:
            raise UsageError("--home-url is required in live visual mode")
        return Engine(model=model, browser=PlaywrightBrowser(home_url))
    except BackendUnavailable as exc:
        raise UsageError(str(exc)) from exc


def _cmd_run(args: argparse.Namespace) -> int:
    config = _load_config(args, args.mode)
    if args.fixture is not None:
        web = load_fixture_web(_require_file(args.fixture, "--fixture"))
        turns = _load_script_turns(_require_file(args.script, "--script"))
        engine = _fixture_engine(web, args.mode, turns, args.home_url)
    else:
        engine = _live_engine(args.mode, args.home_url)
    task = Task(id=args.task_id, query=args.task, access_mode=args.mode)
    result = run_and_answer(task, config, engine, trace_path=args.trace)
    print(result.answer)
    print(
        f"termination: {result.termination_reason} "
        f"(steps {result.steps_used}, aggregations {result.aggregations_used}, "
        f"stack {len(result.stack)}); trace written to {args.trace}",
        file=sys.stderr,
    )
    return 2 if result.termination_reason == "fatal_error" else 0


def _cmd_eval(args: argparse.Namespace) -> int:
    dataset_path = _require_file(args.dataset, "--dataset")
    config = _load_config(args, args.mode)
    if args.fixture is not None:
        web = load_fixture_web(_require_file(args.fixture, "--fixture"))
        scripts_path = _require_file(args.scripts, "--scripts")
        try:
            scripts = json.loads(scripts_path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise UsageError(f"--scripts file is not valid JSON: {exc}") from exc
        if not isinstance(scripts, dict):
            raise UsageError("--scripts file must map example id to turn lists")
        home_url = args.home_url

        def engine_factory(example: Any) -> Engine:
            turns = scripts.get(example.id, [])
            return _fixture_engine(web, args.mode, list(turns), home_url)

    else:
        if args.mode == "visual":
            raise UsageError(
                "eval in live visual mode is not supported; use --fixture"
            )
        _live_engine(args.mode, None)  # fail fast on missing credentials

        def engine_factory(example: Any) -> Engine:
            return _live_engine(args.mode, None)

    report = evaluate_dataset(
        dataset_path,
        config,
        engine_factory,
        mode=args.mode,
        metric=args.metric,
        parallel=max(args.parallel, 1),
        trace_dir=args.trace_dir,
    )
    if args.out:
        report.write_json(args.out)
    if args.predictions:
        report.write_predictions(args.predictions)
    print(json.dumps(report.aggregates, indent=2, sort_keys=True))
    return 0


def _cmd_trace_stats(args: argparse.Namespace) -> int:
    directory = Path(args.trace_dir)
    if not directory.is_dir():
        raise UsageError(f"trace directory not found: {args.trace_dir}")
    stats = trace_stats(directory)
    print(f"runs: {stats.run_count}")
    print(f"termination rate: {stats.termination_success_rate:.0%}")
    print("mean actions per run:")
    for kind, mean in stats.mean_actions.items():
        print(f"  {kind} {mean:.2f}")
    if stats.skipped_files:
        print("skipped files: " + ", ".join(stats.skipped_files))
    else:
        print("skipped files: none")
    return 0


def _cmd_fixtures_validate(args: argparse.Namespace) -> int:
    path = _require_file(args.fixture, "fixtures-validate")
    try:
        web = load_fixture_web(path)
    except FixtureError as exc:
        print(f"invalid fixture: {exc}", file=sys.stderr)
        return 2
    problems = validate_fixture_web(web)
    if problems:
        for problem in problems:
            print(problem, file=sys.stderr)
        return 2
    print(
        f"fixture is valid: {len(web.pages)} pages, "
        f"{len(web.search_index)} indexed queries"
    )
    return 0


_HANDLERS = {
    "run": _cmd_run,
    "eval": _cmd_eval,
    "trace-stats": _cmd_trace_stats,
    "fixtures-validate": _cmd_fixtures_validate,
}


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required (run, eval, trace-stats, fixtures-validate)")
        return _HANDLERS[args.command](args)
    except UsageError as exc:
        print(f"{PROG}: error: {exc}", file=sys.stderr)
        print(f"see `{PROG} --help` for usage", file=sys.stderr)
        return 1
    except SystemExit as exc:
        # argparse exits directly for --help
        return int(exc.code or 0)
    except Exception as exc:
        print(f"{PROG}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


def entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    entry()
