"""Command-line interface: run, delta, humaneval, sample."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Sequence

from .errors import (
    ConfigError,
    IngestionError,
    ScorerError,
    ToolError,
)
from .harness import (
    ALL_METRICS,
    PER_DOC_LEVEL,
    RunConfig,
    delta_report,
    load_outputs,
    load_report,
    render_delta_markdown,
    render_report_json,
    render_report_markdown,
    run_evaluation,
)
from .humaneval import load_ratings, render_humaneval_markdown
from .sampling import (
    DEFAULT_CATEGORY_MAP,
    annotate_pool,
    eligibility_filter,
    load_category_map,
    load_metadata,
    stratified_sample,
)
from .scorer import CacheStore, FixtureTransport, ScorerClient, SubprocessTransport
from .simplicity import load_sle_scores
from .textcore import read_corpus

EXIT_OK = 0
EXIT_UNEXPECTED = 1
EXIT_CONFIG = 2
EXIT_INGESTION = 3
EXIT_SCORER = 4

REPORT_FORMATS = ("json", "markdown")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docsimpeval",
        description="Reference-less evaluation for document simplification",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="evaluate system outputs against sources")
    run.add_argument("--sources", required=True,
                     help="JSON Lines corpus of input documents")
    run.add_argument("--outputs", required=True, nargs="+",
                     help="JSON Lines system outputs, one or more files")
    run.add_argument("--metrics", default=",".join(ALL_METRICS),
                     help="comma-separated subset of: " + ", ".join(ALL_METRICS))
    run.add_argument("--target-level", default=PER_DOC_LEVEL,
                     help="fixed numeric level, or 'per-doc' to use each record")
    run.add_argument("--scorer",
                     help="scorer worker command (spawned, line protocol)")
    run.add_argument("--fixtures",
                     help="recorded scorer responses to replay instead")
    run.add_argument("--sle-scores",
                     help="precomputed per-sentence simplicity score file")
    run.add_argument("--record",
                     help="write all scorer responses to this fixture file")
    run.add_argument("--cache", help="response cache directory")
    run.add_argument("--report-out", help="directory for report files")
    run.add_argument("--format", default="json,markdown",
                     help="comma-separated: json, markdown")
    run.add_argument("--workers", type=int, default=1)
    run.add_argument("--seed", type=int, default=0)

    delta = sub.add_parser("delta",
                           help="out-of-domain minus in-domain report deltas")
    delta.add_argument("--in", dest="in_report", required=True,
                       help="in-domain JSON report")
    delta.add_argument("--out", dest="out_report", required=True,
                       help="out-of-domain JSON report")
    delta.add_argument("--level", type=float, required=True,
                       help="target level shared by both reports")
    delta.add_argument("--json-out", help="also write the delta as JSON here")

    human = sub.add_parser("humaneval",
                           help="aggregate binary human ratings")
    human.add_argument("--ratings", required=True,
                       help="JSON Lines rating records")

    sample = sub.add_parser("sample",
                            help="stratified corpus sample manifest")
    sample.add_argument("--pool", required=True,
                        help="JSON Lines candidate corpus")
    sample.add_argument("--meta", required=True,
                        help="JSON Lines {doc_id, semantic_type} sidecar")
    sample.add_argument("--category-map",
                        help="JSON category grouping; built-in default if absent")
    sample.add_argument("--quota", type=int, required=True,
                        help="documents per category")
    sample.add_argument("--seed", type=int, default=0)
    sample.add_argument("--out", help="write the manifest here instead of stdout")
    return parser


def parse_target_level(text: str) -> float | str:
    if text == PER_DOC_LEVEL:
        return PER_DOC_LEVEL
    try:
        return float(text)
    except ValueError:
        raise ConfigError(
            f"--target-level must be a number or {PER_DOC_LEVEL!r}, got {text!r}"
        ) from None


def parse_formats(text: str) -> tuple[str, ...]:
    formats = tuple(part.strip() for part in text.split(",") if part.strip())
    if not formats:
        raise ConfigError("--format selected nothing")
    unknown = [f for f in formats if f not in REPORT_FORMATS]
    if unknown:
        raise ConfigError(
            f"unknown report format(s) {unknown}; valid: {list(REPORT_FORMATS)}"
        )
    return formats


def cmd_run(args: argparse.Namespace) -> int:
    metrics = tuple(m.strip() for m in args.metrics.split(",") if m.strip())
    config = RunConfig(
        metrics=metrics,
        target_level=parse_target_level(args.target_level),
        workers=args.workers,
        seed=args.seed,
    )
    formats = parse_formats(args.format)
    if args.scorer and args.fixtures:
        raise ConfigError("--scorer and --fixtures are mutually exclusive")

    sources = read_corpus(args.sources)
    instances = load_outputs(args.outputs, sources, config.target_level)
    sle_table = load_sle_scores(args.sle_scores) if args.sle_scores else None

    client = None
    transport = None
    if args.fixtures:
        transport = FixtureTransport(args.fixtures)
    elif args.scorer:
        transport = SubprocessTransport(args.scorer)
    if transport is not None:
        cache = CacheStore(args.cache) if args.cache else None
        client = ScorerClient(transport, cache=cache,
                              record=bool(args.record))
    if args.record and client is None:
        raise ConfigError("--record needs --scorer or --fixtures")
    try:
        report = run_evaluation(instances, config, scorer=client,
                                sle_table=sle_table)
        if args.record:
            client.write_fixture(args.record)
    finally:
        if transport is not None:
            transport.close()

    json_bytes = render_report_json(report)
    markdown = render_report_markdown(report)
    if args.report_out:
        out_dir = Path(args.report_out)
        out_dir.mkdir(parents=True, exist_ok=True)
        if "json" in formats:
            (out_dir / "report.json").write_bytes(json_bytes)
        if "markdown" in formats:
            (out_dir / "report.md").write_text(markdown, encoding="utf-8")
        print(f"wrote {', '.join(formats)} to {out_dir}")
    else:
        if "json" in formats:
            sys.stdout.write(json_bytes.decode("utf-8"))
        if "markdown" in formats:
            sys.stdout.write(markdown)
    return EXIT_OK


def cmd_delta(args: argparse.Namespace) -> int:
    in_report = load_report(args.in_report)
    out_report = load_report(args.out_report)
    delta = delta_report(in_report, out_report, args.level)
    if args.json_out:
        import json as _json

        Path(args.json_out).write_text(
            _json.dumps(delta, sort_keys=True, indent=2, ensure_ascii=False)
            + "\n",
            encoding="utf-8",
        )
    sys.stdout.write(render_delta_markdown(delta))
    return EXIT_OK


def cmd_humaneval(args: argparse.Namespace) -> int:
    ratings = load_ratings(args.ratings)
    sys.stdout.write(render_humaneval_markdown(ratings))
    return EXIT_OK


def cmd_sample(args: argparse.Namespace) -> int:
    category_map = (
        load_category_map(args.category_map)
        if args.category_map
        else DEFAULT_CATEGORY_MAP
    )
    corpus = read_corpus(args.pool)
    metadata = load_metadata(args.meta)
    eligible = [doc_id for doc_id, doc in corpus.items()
                if eligibility_filter(doc)]
    pool = annotate_pool(eligible, metadata, category_map)
    manifest = stratified_sample(pool, args.quota, args.seed)
    text = "\n".join(manifest) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {len(manifest)} doc ids to {args.out}")
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "delta": cmd_delta,
    "humaneval": cmd_humaneval,
    "sample": cmd_sample,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except IngestionError as exc:
        print(f"ingestion error: {exc}", file=sys.stderr)
        return EXIT_INGESTION
    except ScorerError as exc:
        print(f"scorer error: {exc}", file=sys.stderr)
        return EXIT_SCORER
    except ToolError as exc:
        # remaining domain failures read as configuration/data problems
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return EXIT_INGESTION
    except Exception as exc:  # pragma: no cover - last resort
        print(f"unexpected error: {exc}", file=sys.stderr)
        return EXIT_UNEXPECTED


if __name__ == "__main__":
    sys.exit(main())
