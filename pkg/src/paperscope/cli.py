"""Operator command line: ingest, embed, index, search, chat, sample, serve.

Every verb is a thin wrapper over module operations. Files live under a data
directory by convention: corpus.jsonl, embeddings-<space>.jsonl,
index-<space>.json, projection-<space>.jsonl, and state/ for persistence.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
import traceback
from pathlib import Path

from .corpus import CorpusStore, write_corpus
from .embeddings import (
    MOCK,
    REMOTE_MODEL,
    EmbeddingSpace,
    RemoteEmbeddingClient,
    compose_document_text,
    embed_mock,
    write_vectors,
)
from .errors import ConfigurationError, PaperscopeError, ValidationError
from .sample import CORPUS_FILENAME, DEFAULT_DIMENSION, embeddings_filename, write_sample
from .workspace import DEFAULT_SPACE, Workspace, WorkspaceConfig


def index_filename(space: str) -> str:
    return f"index-{space}.json"


def projection_filename(space: str) -> str:
    return f"projection-{space}.jsonl"


def _emit(args: argparse.Namespace, payload: dict, human_lines: list[str]) -> None:
    if args.json:
        print(json.dumps(payload, ensure_ascii=False))
    else:
        for line in human_lines:
            print(line)


def _corpus_path(args: argparse.Namespace) -> Path:
    if getattr(args, "corpus", None):
        return Path(args.corpus)
    return Path(args.data_dir) / CORPUS_FILENAME


def _embeddings_path(args: argparse.Namespace, space: str) -> Path:
    if getattr(args, "embeddings", None):
        return Path(args.embeddings)
    return Path(args.data_dir) / embeddings_filename(space)


def _single_space_workspace(args: argparse.Namespace, with_index: bool = True) -> Workspace:
    """Workspace over one space resolved from flags and data-dir conventions."""
    space = args.space
    corpus = _corpus_path(args)
    if not corpus.exists():
        raise ConfigurationError(f"corpus file not found: {corpus}")
    embeddings = _embeddings_path(args, space)
    embedding_files = {}
    if embeddings.exists():
        embedding_files[space] = embeddings
    elif space != DEFAULT_SPACE:
        raise ConfigurationError(f"no embeddings file for space {space!r}: {embeddings}")
    index_files = {}
    if with_index and not getattr(args, "exact", False):
        index_path = (
            Path(args.index)
            if getattr(args, "index", None)
            else Path(args.data_dir) / index_filename(space)
        )
        if index_path.exists():
            index_files[space] = index_path
    config = WorkspaceConfig(
        corpus_path=corpus,
        embedding_files=embedding_files,
        index_files=index_files,
        default_space=space,
        mock_dimension=getattr(args, "dimension", DEFAULT_DIMENSION),
    )
    return Workspace(config)


def cmd_ingest(args: argparse.Namespace) -> int:
    store = CorpusStore.empty()
    rejected = []
    accepted = 0
    for source in args.input:
        store, report = store.ingest(source)
        accepted += report.accepted
        rejected.extend(
            {"file": str(source), "line": line, "reason": reason}
            for line, reason in report.rejected
        )
    output = Path(args.output) if args.output else Path(args.data_dir) / CORPUS_FILENAME
    output.parent.mkdir(parents=True, exist_ok=True)
    write_corpus(store.records(), output)
    payload = {
        "papers": len(store),
        "accepted": accepted,
        "rejected": rejected,
        "output": str(output),
    }
    lines = [f"ingested {accepted} records into {output} ({len(store)} total)"]
    lines += [f"  rejected {r['file']}:{r['line']}: {r['reason']}" for r in rejected]
    _emit(args, payload, lines)
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    result = write_sample(Path(args.data_dir), args.n, args.seed, dimension=args.dimension)
    _emit(
        args,
        result,
        [
            f"wrote {result['papers']} synthetic records to {result['corpus']}",
            f"wrote mock vectors to {result['embeddings']}",
        ],
    )
    return 0


def cmd_embed(args: argparse.Namespace) -> int:
    corpus_path = _corpus_path(args)
    if not corpus_path.exists():
        raise ConfigurationError(f"corpus file not found: {corpus_path}")
    store, _ = CorpusStore.empty().ingest(corpus_path)
    records = sorted(store.records(), key=lambda r: r.id)
    texts = [compose_document_text(r) for r in records]
    if args.base_url:
        if not args.model:
            raise ValidationError("--model is required with --base-url")
        space = EmbeddingSpace(
            name=args.space, dimension=args.dimension,
            provenance=REMOTE_MODEL, model=args.model,
        )
        client = RemoteEmbeddingClient(base_url=args.base_url, model=args.model)
        vectors = client.embed(texts, space)
    else:
        space = EmbeddingSpace(name=args.space, dimension=args.dimension, provenance=MOCK)
        vectors = embed_mock(texts, space)
    output = Path(args.output) if args.output else _embeddings_path(args, args.space)
    output.parent.mkdir(parents=True, exist_ok=True)
    count = write_vectors(output, zip((r.id for r in records), vectors))
    payload = {"space": args.space, "papers": count, "output": str(output)}
    _emit(args, payload, [f"embedded {count} records into space {args.space!r} at {output}"])
    return 0


def cmd_index(args: argparse.Namespace) -> int:
    workspace = _single_space_workspace(args, with_index=False)
    space = workspace.resolve_space(args.space)
    start = time.perf_counter()
    index = workspace.search.build_index(space)
    elapsed = time.perf_counter() - start
    output = (
        Path(args.output) if args.output else Path(args.data_dir) / index_filename(space)
    )
    output.parent.mkdir(parents=True, exist_ok=True)
    index.save(output)
    payload = {
        "space": space,
        "papers": len(index),
        "output": str(output),
        "seconds": round(elapsed, 3),
    }
    _emit(args, payload, [f"built index over {len(index)} vectors in {elapsed:.2f}s -> {output}"])
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    if not args.seed_id and not args.text:
        raise ValidationError("provide --seed-id or --text")
    workspace = _single_space_workspace(args)
    space = workspace.resolve_space(args.space)
    if args.seed_id:
        hits = workspace.search.similar_by_papers(
            args.seed_id, space, k=args.k, threshold=args.threshold, exact=args.exact
        )
    else:
        hits = workspace.search.similar_by_text(
            args.text, "", space, embed=workspace.batch_embedder(space),
            k=args.k, exact=args.exact,
        )
        if args.threshold is not None:
            hits = [h for h in hits if h.score > args.threshold]
    rows = []
    for hit in hits:
        title = (
            workspace.corpus.get_paper(hit.paper_id).title
            if hit.paper_id in workspace.corpus
            else ""
        )
        rows.append({"paper_id": hit.paper_id, "score": round(hit.score, 6), "title": title})
    payload = {"space": space, "hits": rows}
    _emit(args, payload, [f"{r['paper_id']}\t{r['score']:.4f}\t{r['title']}" for r in rows])
    return 0


def cmd_chat(args: argparse.Namespace) -> int:
    workspace = _single_space_workspace(args)
    space = workspace.resolve_space(args.space)
    session = workspace.sessions.create(space=space, k=args.k)
    result = workspace.orchestrator.chat(session, args.message)
    payload = {
        "session_id": session.session_id,
        "reply": result.reply.text,
        "context_paper_ids": list(result.bundle.context_paper_ids),
        "grounded_count": result.report.grounded_count,
        "ungrounded_count": result.report.ungrounded_count,
    }
    lines = [result.reply.text, ""]
    lines += [
        f"  [{'cite ' + m.matched_id if m.matched_id else 'unverified'}] {m.surface_text}"
        for m in result.report.mentions
    ]
    _emit(args, payload, lines)
    return 0


def _discover_files(data_dir: Path, prefix: str, suffix: str) -> dict[str, Path]:
    found = {}
    if data_dir.is_dir():
        for path in sorted(data_dir.glob(f"{prefix}*{suffix}")):
            space = path.name[len(prefix) : len(path.name) - len(suffix)]
            if space:
                found[space] = path
    return found


def cmd_serve(args: argparse.Namespace) -> int:
    from .api import serve as run_server

    data_dir = Path(args.data_dir)
    if args.config:
        config = WorkspaceConfig.from_file(args.config)
    else:
        config = WorkspaceConfig(
            corpus_path=data_dir / CORPUS_FILENAME,
            embedding_files=_discover_files(data_dir, "embeddings-", ".jsonl"),
            projection_files=_discover_files(data_dir, "projection-", ".jsonl"),
            index_files=_discover_files(data_dir, "index-", ".json"),
            state_dir=data_dir / "state",
        )
    overrides: dict = {}
    if args.corpus:
        overrides["corpus_path"] = Path(args.corpus)
    if args.space:
        overrides["default_space"] = args.space
    if args.embeddings:
        space = args.space or config.default_space
        overrides["embedding_files"] = {**config.embedding_files, space: Path(args.embeddings)}
    if args.projection:
        space = args.space or config.default_space
        overrides["projection_files"] = {**config.projection_files, space: Path(args.projection)}
    if args.mock_llm is not None:
        overrides["mock_llm"] = args.mock_llm
    if args.ui_dir:
        overrides["ui_dir"] = Path(args.ui_dir)
    if overrides:
        config = config.with_overrides(**overrides)
    if not config.corpus_path.exists():
        raise ConfigurationError(f"corpus file not found: {config.corpus_path}")
    workspace = Workspace(config)
    print(
        f"serving {len(workspace.corpus)} papers "
        f"(spaces: {', '.join(workspace.loaded_spaces())}) "
        f"on {args.host}:{args.port}",
        file=sys.stderr,
    )
    run_server(workspace, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--data-dir", default="data", help="directory for data files")
    common.add_argument("--json", action="store_true", help="machine-readable stdout")

    parser = argparse.ArgumentParser(
        prog="paperscope",
        description="Literature exploration service: corpus, similarity search, grounded chat.",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("ingest", parents=[common], help="validate and merge corpus files")
    p.add_argument("--input", action="append", required=True, help="raw corpus JSONL (repeatable)")
    p.add_argument("--output", help="normalized corpus output path")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("sample", parents=[common], help="generate a synthetic sample corpus")
    p.add_argument("--n", type=int, required=True, help="number of records")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--dimension", type=int, default=DEFAULT_DIMENSION)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("embed", parents=[common], help="embed the corpus into a space")
    p.add_argument("--space", default=DEFAULT_SPACE)
    p.add_argument("--corpus")
    p.add_argument("--output")
    p.add_argument("--dimension", type=int, default=DEFAULT_DIMENSION)
    p.add_argument("--base-url", help="remote embedding endpoint (omit for mock)")
    p.add_argument("--model", help="remote embedding model name")
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("index", parents=[common], help="build and save the ANN index")
    p.add_argument("--space", default=DEFAULT_SPACE)
    p.add_argument("--corpus")
    p.add_argument("--embeddings")
    p.add_argument("--output")
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", parents=[common], help="query similar papers offline")
    p.add_argument("--space", default=DEFAULT_SPACE)
    p.add_argument("--seed-id", action="append", help="seed paper id (repeatable)")
    p.add_argument("--text", help="free-text query")
    p.add_argument("--k", type=int, default=25)
    p.add_argument("--threshold", type=float)
    p.add_argument("--exact", action="store_true", help="bypass the ANN index")
    p.add_argument("--corpus")
    p.add_argument("--embeddings")
    p.add_argument("--index")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("chat", parents=[common], help="one-shot grounded chat (offline LLM)")
    p.add_argument("--message", required=True)
    p.add_argument("--space", default=DEFAULT_SPACE)
    p.add_argument("--k", type=int, default=8)
    p.add_argument("--corpus")
    p.add_argument("--embeddings")
    p.add_argument("--index")
    p.set_defaults(func=cmd_chat)

    p = sub.add_parser("serve", parents=[common], help="run the HTTP service")
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--corpus")
    p.add_argument("--embeddings")
    p.add_argument("--projection")
    p.add_argument("--space")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--mock-llm", action=argparse.BooleanOptionalAction, default=None)
    p.add_argument("--ui-dir", help="static assets served under /ui")
    p.set_defaults(func=cmd_serve)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 1
    try:
        return args.func(args)
    except (PaperscopeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:
        traceback.print_exc()
        return 2


def main() -> None:
    sys.exit(run(argv=None))
