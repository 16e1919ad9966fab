"""Command-line entry point.

Subcommands: ingest-curriculum, ingest-corpus, gen-topics, gen-passages,
analyze, judge, stats, report, replay-verify.  Exit codes: 0 success,
1 usage error, 2 data error, 3 backend error.
"""

from __future__ import annotations

import argparse
import json
import shutil
import sys
from pathlib import Path

from . import reporting, runner, textmetrics
from .config import RunConfig, build_gateways, load_config
from .errors import BackendError, DataError, PassageLabError, UsageError
from .promptkit import Mode
from .stats import aggregate
from .store import RunStore


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D102 - argparse hook
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="passagelab", description=__doc__)
    parser.add_argument("--config", help="run configuration file (JSON)")
    parser.add_argument("--run-id", default="default", help="run directory name")
    parser.add_argument("--seed", type=int, help="override the config seed")
    parser.add_argument("--cassette", help="cassette file to record to or replay from")
    parser.add_argument(
        "--offline", action="store_true", help="serve all backends from the cassette"
    )
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("ingest-curriculum", help="validate and snapshot a catalog")
    p.add_argument("catalog", help="catalog JSON file")

    p = sub.add_parser("ingest-corpus", help="ingest annotated human passages")
    p.add_argument("corpus", help="corpus JSON file")

    sub.add_parser("gen-topics", help="generate wonder topics per curriculum item")

    p = sub.add_parser("gen-passages", help="generate passages for stored topics")
    p.add_argument(
        "--mode",
        choices=["base", "cogent", "both"],
        default="both",
        help="generation mode(s) to run",
    )
    p.add_argument(
        "--backends",
        default="all",
        help="comma-separated backend ids, or 'all'",
    )

    p = sub.add_parser("analyze", help="readability reports for files or the run store")
    p.add_argument("files", nargs="*", help="text files (default: analyze the run store)")

    p = sub.add_parser("judge", help="run LLM-judge tasks over stored passages")
    p.add_argument(
        "--tasks",
        default="alignment,categorize,comprehensibility",
        help="comma-separated subset of alignment,categorize,comprehensibility",
    )

    sub.add_parser("stats", help="print the BASE vs COGENT comparison table")
    sub.add_parser("report", help="emit the full report bundle")
    sub.add_parser(
        "replay-verify",
        help="re-execute the manifest stages offline and compare output digests",
    )
    return parser


def _require_config(args) -> RunConfig:
    if not args.config:
        raise UsageError("this command requires --config")
    config = load_config(args.config)
    if args.seed is not None:
        config = RunConfig(**{**config.__dict__, "seed": args.seed})
    return config


def _open_run(args, config: RunConfig | None = None) -> RunStore:
    root = config.runs_root if config else "runs"
    run = RunStore(root, args.run_id)
    if config:
        run.update_manifest(seed=config.seed, config=config.snapshot())
    return run


def _gateways(args, config: RunConfig):
    if args.offline and not args.cassette:
        raise UsageError("--offline requires --cassette")
    return build_gateways(config, offline=args.offline, cassette=args.cassette)


def _analyze_files(paths: list[str]) -> int:
    for path in paths:
        if not Path(path).is_file():
            raise DataError(f"file not found: {path}")
        try:
            report = textmetrics.readability_report(Path(path).read_text(encoding="utf-8"))
        except ValueError as exc:
            raise DataError(f"{path}: {exc}") from exc
        print(
            json.dumps(
                {
                    "file": path,
                    "flesch_reading_ease": report.flesch_reading_ease,
                    "flesch_kincaid_grade": report.flesch_kincaid_grade,
                    "gunning_fog": report.gunning_fog,
                    "automated_readability_index": report.automated_readability_index,
                    "coleman_liau": report.coleman_liau,
                    "words": report.stats.word_count,
                    "sentences": report.stats.sentence_count,
                    "unique_words": report.stats.unique_word_count,
                },
                sort_keys=True,
            )
        )
    return 0


def _dispatch(args) -> int:
    if args.command is None:
        raise UsageError("no command given (try --help)")

    if args.command == "analyze" and args.files:
        return _analyze_files(args.files)

    config = _require_config(args)
    run = _open_run(args, config)

    if args.command == "ingest-curriculum":
        catalog = runner.ingest_curriculum(run, args.catalog)
        concepts, ideas = catalog.counts()
        print(
            f"ingested catalog {catalog.standard_name!r}: {concepts} concepts, "
            f"{ideas} core ideas, {len(catalog.outcomes)} outcomes"
        )
        return 0

    if args.command == "ingest-corpus":
        records = runner.ingest_reference_corpus(run, args.corpus)
        print(f"ingested {len(records)} human passages")
        print(run.path(runner.CORPUS_SUMMARY).read_text(encoding="utf-8"), end="")
        return 0

    if args.command == "gen-topics":
        gateways = _gateways(args, config)
        rows = runner.run_topic_generation(
            run,
            gateways[config.topic_backend],
            n_generate=config.n_topics_generate,
            n_select=config.n_topics_select,
            seed=config.seed,
            templates=config.templates(),
        )
        print(f"selected {len(rows)} topics")
        return 0

    if args.command == "gen-passages":
        gateways = _gateways(args, config)
        modes = {"base": [Mode.BASE], "cogent": [Mode.COGENT], "both": [Mode.BASE, Mode.COGENT]}[
            args.mode
        ]
        if args.backends == "all":
            backend_ids = [b.backend_id for b in config.backends]
        else:
            backend_ids = [b.strip() for b in args.backends.split(",") if b.strip()]
        total = 0
        for backend_id in backend_ids:
            if backend_id not in gateways:
                raise DataError(f"unknown backend id {backend_id!r}")
            for mode in modes:
                records = runner.run_passage_generation(
                    run,
                    mode,
                    gateways[backend_id],
                    passages_per_topic=config.passages_per_topic,
                    templates=config.templates(),
                )
                total += len(records)
        print(f"generated {total} passages")
        return 0

    if args.command == "analyze":
        rows = runner.run_readability(run, grade_margin=config.grade_margin)
        print(f"analyzed {len(rows)} passages")
        return 0

    if args.command == "judge":
        tasks = [t.strip() for t in args.tasks.split(",") if t.strip()]
        gateways = _gateways(args, config)
        counts = runner.run_judging(
            run,
            gateways[config.judge.backend_id],
            tasks=tasks,
            templates=config.templates(),
            repetitions=config.judge_repetitions,
        )
        print(json.dumps(counts, sort_keys=True))
        return 0

    if args.command == "stats":
        records = reporting.score_records(run)
        generated = [r for r in records if r.condition != Mode.HUMAN.value]
        table = aggregate(
            generated, m=config.bonferroni_m, condition_order=["BASE", "COGENT"]
        )
        print(table.to_tsv(), end="")
        return 0

    if args.command == "report":
        report = reporting.run_report(run, bonferroni_m=config.bonferroni_m)
        print(f"report bundle written to {run.report_dir()}")
        print(
            json.dumps(
                {"reconciliation": report["reconciliation"], "accuracy": report["accuracy"]},
                sort_keys=True,
            )
        )
        return 0

    if args.command == "replay-verify":
        return _replay_verify(args, config, run)

    raise UsageError(f"unknown command {args.command!r}")


def _replay_verify(args, config: RunConfig, run: RunStore) -> int:
    """Re-execute this run's manifest stages into a scratch run and diff digests."""
    if not args.cassette:
        raise UsageError("replay-verify requires --cassette")
    manifest = run.load_manifest()
    stages = manifest.get("stages", [])
    if not stages:
        raise DataError(f"run {run.run_id!r} has no recorded stages to verify")
    scratch_id = f"{run.run_id}.verify"
    scratch_root = Path(config.runs_root)
    scratch_path = scratch_root / scratch_id
    if scratch_path.exists():
        shutil.rmtree(scratch_path)
    scratch = RunStore(config.runs_root, scratch_id)
    scratch.update_manifest(seed=config.seed, config=config.snapshot())
    gateways = build_gateways(config, offline=True, cassette=args.cassette)
    templates = config.templates()
    for stage in stages:
        op, params = stage["op"], stage["params"]
        if op == "ingest-curriculum":
            runner.ingest_curriculum(scratch, params["path"])
        elif op == "ingest-corpus":
            runner.ingest_reference_corpus(scratch, params["path"])
        elif op == "gen-topics":
            runner.run_topic_generation(
                scratch,
                gateways[params["backend"]],
                n_generate=params["n_generate"],
                n_select=params["n_select"],
                seed=params["seed"],
                templates=templates,
            )
        elif op == "gen-passages":
            runner.run_passage_generation(
                scratch,
                Mode(params["mode"]),
                gateways[params["backend"]],
                passages_per_topic=params["passages_per_topic"],
                templates=templates,
            )
        elif op == "analyze":
            runner.run_readability(scratch, grade_margin=params["grade_margin"])
        elif op == "judge":
            runner.run_judging(
                scratch,
                gateways[params["judge"]],
                tasks=params["tasks"],
                templates=templates,
                repetitions=params["repetitions"],
            )
        elif op == "report":
            reporting.run_report(scratch, bonferroni_m=params["bonferroni_m"])
        else:
            raise DataError(f"manifest contains unknown stage {op!r}")
    original = run.output_digests()
    replayed = scratch.output_digests()
    mismatches = 0
    for name in sorted(set(original) | set(replayed)):
        if original.get(name) == replayed.get(name):
            print(f"OK    {name}")
        else:
            mismatches += 1
            print(f"DIFF  {name}")
    shutil.rmtree(scratch_path)
    if mismatches:
        print(f"{mismatches} file(s) differ")
        raise DataError(f"replay produced {mismatches} differing file(s)")
    print(f"all {len(original)} files verified")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return _dispatch(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except BackendError as exc:
        print(f"backend error: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except PassageLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
