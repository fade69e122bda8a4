"""Command-line entry points.

    sidequest serve   --config engine.json
    sidequest replay  --trace trace.jsonl --config engine.json --out report/
    sidequest index build --corpus papers.jsonl --out papers.idx
    sidequest search  --index papers.idx --query "retrieval latency" -k 5
    sidequest eval mrr --run run.txt --qrels qrels.txt -k 10
"""

from __future__ import annotations

import argparse
import sys

from .adapters import HashingEmbedder
from .config import ConfigError, EngineConfig

__all__ = ["main"]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sidequest",
        description="Proactive literature search over your on-screen reading.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--config", required=True, help="engine config JSON")

    p_replay = sub.add_parser("replay", help="replay a frame trace and write a report")
    p_replay.add_argument("--trace", required=True, help="trace JSONL file")
    p_replay.add_argument("--config", required=True, help="engine config JSON")
    p_replay.add_argument("--out", required=True, help="report output directory")
    p_replay.add_argument("--no-figures", action="store_true", help="skip figure rendering")
    p_replay.add_argument("--abort-after-frames", type=int, help=argparse.SUPPRESS)

    p_index = sub.add_parser("index", help="corpus index operations")
    index_sub = p_index.add_subparsers(dest="index_command", required=True)
    p_build = index_sub.add_parser("build", help="embed and index a corpus JSONL file")
    p_build.add_argument("--corpus", required=True)
    p_build.add_argument("--out", required=True, help="index file path")
    p_build.add_argument("--dimension", type=int, default=384)

    p_search = sub.add_parser("search", help="query an index")
    p_search.add_argument("--index", required=True)
    p_search.add_argument("--query", required=True)
    p_search.add_argument("-k", type=int, default=3)

    p_eval = sub.add_parser("eval", help="retrieval evaluation")
    eval_sub = p_eval.add_subparsers(dest="eval_command", required=True)
    p_mrr = eval_sub.add_parser("mrr", help="mean reciprocal rank of a run file")
    p_mrr.add_argument("--run", required=True)
    p_mrr.add_argument("--qrels", required=True)
    p_mrr.add_argument("-k", type=int, default=10)

    return parser


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    serve(EngineConfig.from_file(args.config))
    return 0


def _cmd_replay(args: argparse.Namespace) -> int:
    from .replay import TraceError, replay

    config = EngineConfig.from_file(args.config)
    try:
        result = replay(
            args.trace,
            config,
            args.out,
            figures=not args.no_figures,
            abort_after_frames=args.abort_after_frames,
        )
    except TraceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    print(
        f"replayed {result.frames} frames: {len(result.events)} events, "
        f"{len(result.cards)} cards, {len(result.warnings)} warnings -> {args.out}"
    )
    return 0


def _cmd_index_build(args: argparse.Namespace) -> int:
    from .retrieval import MetadataStore, ingest_corpus, metadata_path_for, read_corpus_jsonl

    embedder = HashingEmbedder(args.dimension)
    meta_path = metadata_path_for(args.out)
    if meta_path.exists():
        meta_path.unlink()  # rebuild, don't merge
    store = MetadataStore(meta_path)
    index, _, stats = ingest_corpus(read_corpus_jsonl(args.corpus), embedder, store)
    index.save(args.out)
    print(
        f"indexed {stats.indexed}/{stats.records_in} records "
        f"(no-abstract {stats.filtered_no_abstract}, duplicates {stats.rejected_duplicate}, "
        f"malformed {stats.malformed}) -> {args.out}"
    )
    return 0


def _cmd_search(args: argparse.Namespace) -> int:
    from .retrieval import MetadataStore, VectorIndex, embed_query, metadata_path_for

    index = VectorIndex.load(args.index)
    meta_path = metadata_path_for(args.index)
    metadata = MetadataStore(meta_path) if meta_path.exists() else None
    embedder = HashingEmbedder(index.dimension)
    results = index.search(embed_query(args.query, embedder), args.k, metadata)
    for r in results:
        title = r.metadata.title if r.metadata else ""
        year = r.metadata.year if r.metadata and r.metadata.year else ""
        print(f"{r.rank}\t{r.doc_id}\t{r.score:.6f}\t{title}\t{year}")
    return 0


def _cmd_eval_mrr(args: argparse.Namespace) -> int:
    from .retrieval import load_qrels, load_run, mrr_at_k

    value = mrr_at_k(load_run(args.run), load_qrels(args.qrels), k=args.k)
    print(f"MRR@{args.k} = {value:.6f}")
    return 0


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "serve":
            return _cmd_serve(args)
        if args.command == "replay":
            return _cmd_replay(args)
        if args.command == "index":
            return _cmd_index_build(args)
        if args.command == "search":
            return _cmd_search(args)
        if args.command == "eval":
            return _cmd_eval_mrr(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    raise AssertionError(f"unhandled command {args.command}")


if __name__ == "__main__":
    sys.exit(main())
