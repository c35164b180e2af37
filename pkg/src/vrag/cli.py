"""Command-line interface: index, query, serve, eval.

Exit codes: 0 success, 1 user/input error, 2 internal error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .config import ConfigError, load_config
from .engine import (
    ManifestError,
    QueryEngine,
    build_index,
    build_suite_from_config,
    load_manifest,
)
from .evaluation import (
    DEFAULT_REPETITIONS,
    EvalInputError,
    quantitative_score,
    read_answers,
    winrate_compare,
)
from .generation import format_seconds
from .ingestion import IngestionError
from .providers import ProviderError
from .report import render_table, write_report_files
from .retrieval import Query
from .service import QueryService
from .storage import StorageError, load_index, save_index

USER_ERRORS = (ManifestError, ConfigError, StorageError, EvalInputError,
               IngestionError, FileNotFoundError, ValueError, KeyError)


def cmd_index(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    manifest = load_manifest(Path(args.manifest))
    out_dir = Path(args.out)
    if out_dir.exists() and not args.force:
        print(f"error: {out_dir} already exists (use --force to replace)",
              file=sys.stderr)
        return 1
    bundle = build_index(manifest, config)
    save_index(bundle, out_dir, overwrite=args.force)
    counts = bundle.meta.counts
    print(f"indexed {counts['videos']} videos: {counts['clips']} clips, "
          f"{counts['chunks']} chunks, {counts['entities']} entities, "
          f"{counts['relations']} relations -> {out_dir}")
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    bundle = load_index(Path(args.index))
    engine = QueryEngine(bundle, config)
    result = engine.answer(Query("cli", args.text))
    print(result.answer)
    print()
    print("PROVENANCE")
    for ref in result.output.provenance:
        if ref.kind == "clip":
            span = f"{format_seconds(ref.start_s)}–{format_seconds(ref.end_s)}"
            print(f"clip {ref.ref} [{ref.video_id} {span}]")
        else:
            print(f"chunk {ref.ref}")
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    bundle = load_index(Path(args.index))
    engine = QueryEngine(bundle, config)
    host, _, port_text = args.bind.rpartition(":")
    if not host or not port_text.isdigit():
        print(f"error: --bind must be HOST:PORT, got {args.bind!r}", file=sys.stderr)
        return 1
    service = QueryService(engine, port=int(port_text), host=host)
    print(f"serving index {args.index} on {service.url}")
    service.serve_blocking()
    return 0


def _read_queries(path: str) -> list[Query]:
    queries = []
    seen: set[str] = set()
    for line_no, line in enumerate(Path(path).read_text("utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
            query = Query(rec["query_id"], rec["text"])
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise EvalInputError(f"{path}:{line_no}: bad query record: {exc}") from exc
        if query.query_id in seen:
            raise EvalInputError(f"{path}:{line_no}: duplicate query_id")
        seen.add(query.query_id)
        queries.append(query)
    if not queries:
        raise EvalInputError(f"{path}: no queries")
    return queries


def _run_eval(args: argparse.Namespace, protocol: str) -> int:
    config = load_config(args.config)
    suite = build_suite_from_config(config)
    judge = suite.chat_provider
    queries = _read_queries(args.queries)
    out_dir = Path(args.out)
    records_path = out_dir / "judgments.jsonl"
    if protocol == "winrate":
        report, _ = winrate_compare(
            queries, read_answers(Path(args.a)), read_answers(Path(args.b)), judge,
            repetitions=args.reps, records_path=records_path,
            max_workers=config.provider.max_concurrency)
    else:
        report, _ = quantitative_score(
            queries, read_answers(Path(args.baseline)), read_answers(Path(args.eval)),
            judge, repetitions=args.reps, records_path=records_path,
            max_workers=config.provider.max_concurrency)
    paths = write_report_files(report, out_dir)
    print(render_table(report), end="")
    print(f"report files: {', '.join(str(p) for p in paths.values())}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="vrag",
        description="Retrieval-augmented generation over long-video libraries")
    sub = parser.add_subparsers(dest="command", required=True)

    p_index = sub.add_parser("index", help="build an index from a library manifest")
    p_index.add_argument("--manifest", required=True)
    p_index.add_argument("--config", default=None)
    p_index.add_argument("--out", required=True)
    p_index.add_argument("--force", action="store_true",
                         help="replace an existing index directory")
    p_index.set_defaults(func=cmd_index)

    p_query = sub.add_parser("query", help="answer one query against an index")
    p_query.add_argument("--index", required=True)
    p_query.add_argument("--text", required=True)
    p_query.add_argument("--config", default=None)
    p_query.set_defaults(func=cmd_query)

    p_serve = sub.add_parser("serve", help="serve /query over an index")
    p_serve.add_argument("--index", required=True)
    p_serve.add_argument("--bind", default="127.0.0.1:8080")
    p_serve.add_argument("--config", default=None)
    p_serve.set_defaults(func=cmd_serve)

    p_eval = sub.add_parser("eval", help="LLM-judged answer evaluation")
    eval_sub = p_eval.add_subparsers(dest="protocol", required=True)

    p_win = eval_sub.add_parser("winrate", help="pairwise win-rate comparison")
    p_win.add_argument("--queries", required=True)
    p_win.add_argument("--a", required=True, help="side-A answers (JSON lines)")
    p_win.add_argument("--b", required=True, help="side-B answers (JSON lines)")
    p_win.add_argument("--reps", type=int, default=DEFAULT_REPETITIONS)
    p_win.add_argument("--config", default=None)
    p_win.add_argument("--out", default="eval-report")
    p_win.set_defaults(func=lambda a: _run_eval(a, "winrate"))

    p_quant = eval_sub.add_parser("quant", help="1-5 scoring against a baseline")
    p_quant.add_argument("--queries", required=True)
    p_quant.add_argument("--baseline", required=True)
    p_quant.add_argument("--eval", required=True)
    p_quant.add_argument("--reps", type=int, default=DEFAULT_REPETITIONS)
    p_quant.add_argument("--config", default=None)
    p_quant.add_argument("--out", default="eval-report")
    p_quant.set_defaults(func=lambda a: _run_eval(a, "quant"))

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except USER_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ProviderError as exc:
        print(f"provider error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # internal bug
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
