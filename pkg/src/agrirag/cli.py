"""Command line interface: ingest, ask, serve, eval.

Exit codes: 0 answered / success, 1 bad configuration, 2 query refused
(out-of-domain or not in context), 3 backend error, 4 eval run had failing
cases.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ServiceConfig, build_clients, load_config
from .corpus import chunk_text, load_documents
from .enrichment import load_rules
from .errors import ConfigurationError
from .evaluation import run_eval, write_report
from .index import IndexEntry, VectorIndex
from .pipeline import answer_query, load_prompt_template

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_REJECTED = 2
EXIT_BACKEND = 3
EXIT_EVAL_FAILURES = 4


def _load_config_or_default(path: str | None) -> ServiceConfig:
    if path is None:
        return ServiceConfig()
    return load_config(path)


def cmd_ingest(args: argparse.Namespace) -> int:
    config = _load_config_or_default(args.config)
    documents = load_documents(args.corpus_dir)
    chunks = [
        chunk
        for doc in documents
        for chunk in chunk_text(doc, config.pipeline.chunk_size, config.pipeline.chunk_overlap)
    ]
    clients = build_clients(config)
    index = VectorIndex(config.pipeline.dim)
    if chunks:
        vectors = clients.embedder.embed_batch([c.text for c in chunks])
        index.add([IndexEntry.from_chunk(c, v) for c, v in zip(chunks, vectors)])
    written = index.save(args.index)
    print(
        f"ingested {len(documents)} docs into {len(chunks)} chunks; "
        f"wrote {written} bytes to {args.index}"
    )
    return EXIT_OK


def cmd_ask(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    config.require_paths(index=True)
    index = VectorIndex.load(config.index_path)
    rulebook = load_rules(config.rulebook_path)
    template = load_prompt_template(config.prompt_template_path)
    clients = build_clients(config)
    trace = answer_query(
        args.query, config.pipeline, index, rulebook, clients,
        template=template, top_k=args.top_k,
    )
    if args.json:
        print(json.dumps(trace.to_dict(), ensure_ascii=False, indent=2))
    else:
        print(trace.answer_bn)
    if trace.status == "answered":
        return EXIT_OK
    if trace.status == "backend_error":
        logger.error("backend error at stage %s: %s", trace.error_stage, trace.error_message)
        return EXIT_BACKEND
    return EXIT_REJECTED


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    config.require_paths(index=True)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    config = load_config(args.config)
    config.require_paths(index=True)
    report = run_eval(args.queries, config)
    write_report(report, args.report, format=args.format)
    print(f"cases: {len(report.verdicts)}  pass rate: {report.pass_rate:.0%}")
    for category, rate in report.category_pass_rates.items():
        print(f"  {category}: {rate:.0%}")
    for verdict in report.verdicts:
        if not verdict.passed:
            print(f"  FAIL {verdict.case_id}: {verdict.reason}")
    if report.invalid_lines:
        print(f"  invalid case lines: {report.invalid_lines}")
    print(f"mean total latency: {report.timing_stats['total']['mean']:.1f} ms")
    print(f"report written to {args.report}")
    return EXIT_OK if report.all_passed and not report.invalid_lines else EXIT_EVAL_FAILURES


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="agrirag",
        description="Cross-lingual retrieval-augmented advisory engine (Bengali in, Bengali out).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", help="chunk + embed a corpus directory into an index file")
    p_ingest.add_argument("corpus_dir", type=Path)
    p_ingest.add_argument("--index", required=True, type=Path, help="output index file")
    p_ingest.add_argument("--config", default=None, help="config JSON (default: mock backends)")
    p_ingest.set_defaults(func=cmd_ingest)

    p_ask = sub.add_parser("ask", help="answer one Bengali query against a built index")
    p_ask.add_argument("query")
    p_ask.add_argument("--config", required=True)
    p_ask.add_argument("--json", action="store_true", help="print the full trace as JSON")
    p_ask.add_argument("--top-k", type=int, default=None)
    p_ask.set_defaults(func=cmd_ask)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", required=True)
    p_serve.set_defaults(func=cmd_serve)

    p_eval = sub.add_parser("eval", help="replay a JSONL case file and write a report")
    p_eval.add_argument("--queries", required=True, type=Path)
    p_eval.add_argument("--report", required=True, type=Path)
    p_eval.add_argument("--config", required=True)
    p_eval.add_argument("--format", choices=("json", "csv"), default="json")
    p_eval.set_defaults(func=cmd_eval)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
