"""Command-line entry point for the whole pipeline.

Exit codes: 0 success, 1 runtime or configuration failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from typing import Dict, List, Optional, Sequence

from .config import AppConfig, load_config
from .construct import (
    ConstructConfig,
    build_ackg,
    chunk_document,
    load_manifest,
)
from .errors import ArtContextError, ConfigurationError
from .gateway import create_gateway
from .generate import PromptTemplate, explain
from .graph import load_graph
from .index import build_index, load_index, save_index
from .metrics import EvalPair, evaluate_corpus
from .retriever import PaintingQuery, retrieve_context, subgraph_to_json

logger = logging.getLogger(__name__)


def _add_config_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="TOML config file (or set ARTCONTEXT_CONFIG)")


def _add_painting_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--image", help="path to the painting image")
    parser.add_argument("--title")
    parser.add_argument("--artist")
    parser.add_argument("--technique")
    parser.add_argument("--timeframe")
    parser.add_argument("--school")
    parser.add_argument("--question", help="free-text question about the painting")


def _add_retriever_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--k-coarse", dest="k_coarse", type=int, help="coarse seed count")
    parser.add_argument("--k", dest="k", type=int, help="post-expansion candidate count")
    parser.add_argument("--m", dest="m", type=int, help="final subgraph node count")
    parser.add_argument("--lambda", dest="lam", type=float, help="score fusion weight")
    parser.add_argument("--concepts", dest="concepts", type=int, help="concepts per painting")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="artcontext",
        description="Knowledge-graph construction, retrieval, and explanation for artworks.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="chunk the corpus named by a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", help="write chunks as JSON lines to this path")
    p.add_argument("--window", type=int, help="window size in tokens")
    p.add_argument("--overlap", type=int, help="overlap between windows in tokens")
    p.add_argument("--strict-stride", dest="strict_stride", action="store_true")
    _add_config_flag(p)

    p = sub.add_parser("build-graph", help="extract and clean a graph from the corpus")
    p.add_argument("--manifest", required=True)
    p.add_argument("--graph", required=True, help="output graph path (JSON lines)")
    p.add_argument("--raw-graph", dest="raw_graph", help="also write the pre-cleaning graph")
    p.add_argument("--report", help="write the cleaning report JSON here")
    p.add_argument("--window", type=int)
    p.add_argument("--overlap", type=int)
    p.add_argument("--threshold", type=float, help="dedup similarity threshold")
    p.add_argument("--prompts", help="directory overriding packaged prompt templates")
    p.add_argument("--fixtures", help="mock gateway fixtures JSON file")
    _add_config_flag(p)

    p = sub.add_parser("stats", help="print the per-type summary table of a graph")
    p.add_argument("--graph", required=True)
    p.add_argument("--json", action="store_true", help="machine-readable output")

    p = sub.add_parser("index", help="embed graph nodes into a vector index")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True, help="index output path")
    p.add_argument("--fixtures", help="mock gateway fixtures JSON file")
    _add_config_flag(p)

    p = sub.add_parser("retrieve", help="retrieve the context subgraph for a painting")
    p.add_argument("--graph")
    p.add_argument("--index")
    p.add_argument("--prompts")
    p.add_argument("--fixtures")
    _add_painting_flags(p)
    _add_retriever_flags(p)
    _add_config_flag(p)

    p = sub.add_parser("explain", help="generate a context-grounded explanation")
    p.add_argument("--graph")
    p.add_argument("--index")
    p.add_argument("--prompts")
    p.add_argument("--fixtures")
    p.add_argument("--template", help="generation template JSON file")
    p.add_argument("--output", choices=("json", "text"), default="json")
    _add_painting_flags(p)
    _add_retriever_flags(p)
    _add_config_flag(p)

    p = sub.add_parser("eval", help="score candidate texts against references")
    p.add_argument("--candidates", required=True, help="JSON lines: {id, text}")
    p.add_argument("--references", required=True, help="JSON lines: {id, texts} or {id, text}")
    p.add_argument("--report", help="write the full report JSON here")

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--graph")
    p.add_argument("--index")
    p.add_argument("--prompts")
    p.add_argument("--fixtures")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    _add_config_flag(p)

    return parser


def _overrides(args: argparse.Namespace) -> Dict[str, object]:
    keys = (
        "graph", "index", "prompts", "fixtures", "window", "overlap", "threshold",
        "k_coarse", "k", "m", "lam", "concepts", "host", "port", "strict_stride",
    )
    out: Dict[str, object] = {}
    for key in keys:
        value = getattr(args, key, None)
        if value is not None and value is not False:
            out[key] = value
    return out


def _app_config(args: argparse.Namespace) -> AppConfig:
    return load_config(getattr(args, "config", None), overrides=_overrides(args))


def _painting(args: argparse.Namespace) -> PaintingQuery:
    attributes = {}
    for key in ("title", "artist", "technique", "timeframe", "school"):
        value = getattr(args, key, None)
        if value:
            attributes[key] = value
    return PaintingQuery(
        image=args.image if getattr(args, "image", None) else None,
        attributes=attributes,
        question=getattr(args, "question", None),
    )


# ---- subcommand handlers ----


def cmd_ingest(args: argparse.Namespace) -> int:
    config = _app_config(args)
    manifest = load_manifest(args.manifest)
    total_chunks = 0
    out_handle = open(args.out, "w", encoding="utf-8") if args.out else None
    try:
        for entry in sorted(manifest.entries, key=lambda e: e.id):
            with open(entry.path, "r", encoding="utf-8") as handle:
                text = handle.read()
            chunks = chunk_document(
                text,
                config.construct.window_tokens,
                config.construct.overlap_tokens,
                doc_id=entry.id,
                strict_stride=config.construct.strict_stride,
            )
            total_chunks += len(chunks)
            if out_handle:
                for chunk in chunks:
                    record = {
                        "doc": chunk.doc_id,
                        "index": chunk.index,
                        "start": chunk.start,
                        "end": chunk.end,
                        "text": chunk.text,
                    }
                    out_handle.write(json.dumps(record, ensure_ascii=False) + "\n")
    finally:
        if out_handle:
            out_handle.close()
    print(f"{len(manifest.entries)} documents, {total_chunks} chunks")
    return 0


def cmd_build_graph(args: argparse.Namespace) -> int:
    config = _app_config(args)
    gateway = create_gateway(config.gateway)
    manifest = load_manifest(args.manifest)
    construct_config = ConstructConfig(
        window_tokens=config.construct.window_tokens,
        overlap_tokens=config.construct.overlap_tokens,
        strict_stride=config.construct.strict_stride,
        dedup_threshold=config.construct.dedup_threshold,
        prompt_dir=config.prompt_dir or None,
        graph_path=args.graph,
        raw_graph_path=args.raw_graph,
        report_path=args.report,
    )
    graph, report = build_ackg(gateway, manifest, construct_config)
    print(report.render())
    print()
    print(graph.stats().render())
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph)
    stats = graph.stats()
    if args.json:
        print(json.dumps(stats.as_dict(), ensure_ascii=False, indent=2))
    else:
        print(stats.render())
    return 0


def cmd_index(args: argparse.Namespace) -> int:
    config = _app_config(args)
    gateway = create_gateway(config.gateway)
    graph = load_graph(args.graph)
    index = build_index(gateway, graph)
    save_index(index, args.out)
    print(f"indexed {index.count} nodes at dim {index.dim} -> {args.out}")
    return 0


def cmd_retrieve(args: argparse.Namespace) -> int:
    config = _app_config(args)
    gateway = create_gateway(config.gateway)
    graph = load_graph(config.require_graph())
    index = load_index(config.require_index())
    subgraph = retrieve_context(
        gateway, graph, index, _painting(args), config.retriever,
        prompt_dir=config.prompt_dir or None,
    )
    sys.stdout.write(subgraph_to_json(subgraph) + "\n")
    return 0


def cmd_explain(args: argparse.Namespace) -> int:
    config = _app_config(args)
    gateway = create_gateway(config.gateway)
    graph = load_graph(config.require_graph())
    index = load_index(config.require_index())
    template = PromptTemplate.load(args.template) if args.template else None
    result = explain(
        gateway, graph, index, _painting(args), config.retriever,
        template=template,
        prompt_dir=config.prompt_dir or None,
        char_budget=config.char_budget,
    )
    if args.output == "text":
        print(result.explanation)
    else:
        print(json.dumps(result.as_dict(), ensure_ascii=False, indent=2))
    return 0


def _read_jsonl(path: str) -> List[Dict[str, object]]:
    rows = []
    with open(path, "r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                rows.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise ConfigurationError(f"{path}:{line_no}: invalid JSON ({exc.msg})") from None
    return rows


def cmd_eval(args: argparse.Namespace) -> int:
    candidates = _read_jsonl(args.candidates)
    references: Dict[str, List[str]] = {}
    for row in _read_jsonl(args.references):
        row_id = str(row.get("id", ""))
        texts = row.get("texts")
        if texts is None:
            texts = [row.get("text", "")]
        references[row_id] = [str(t) for t in texts]
    pairs = []
    for row in candidates:
        row_id = str(row.get("id", ""))
        if row_id not in references:
            raise ConfigurationError(f"candidate {row_id!r} has no reference entry")
        pairs.append(EvalPair(row_id, str(row.get("text", "")), references[row_id]))
    report = evaluate_corpus(pairs)
    print(report.render())
    if args.report:
        report.save(args.report)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    import uvicorn

    from .service import create_app

    config = _app_config(args)
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


_HANDLERS = {
    "ingest": cmd_ingest,
    "build-graph": cmd_build_graph,
    "stats": cmd_stats,
    "index": cmd_index,
    "retrieve": cmd_retrieve,
    "explain": cmd_explain,
    "eval": cmd_eval,
    "serve": cmd_serve,
}


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:  # argparse uses 2 for usage errors
        return int(exc.code or 0)
    try:
        return _HANDLERS[args.command](args)
    except ArtContextError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    sys.exit(run_cli(sys.argv[1:]))
