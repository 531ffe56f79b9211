"""Service composition: load config and data files, wire every component.

A workspace owns the corpus, embedding spaces, search front door, projection
registry, templates, saved sets, chat sessions, and the LLM client. All
heavyweight state is loaded once at construction and shared read-only.
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .corpus import CorpusStore
from .embeddings import (
    MOCK,
    PRECOMPUTED_FILE,
    REMOTE_MODEL,
    EmbeddingSpace,
    EmbeddingStore,
    RemoteEmbeddingClient,
    compose_document_text,
    embed_mock,
    load_precomputed,
)
from .errors import ConfigurationError, ValidationError
from .index import AnnIndex, VectorSearch
from .llm import HttpLlmClient, LlmClient, TitleEchoLlm
from .projection import (
    ProjectionPoint,
    ProjectionRegistry,
    load_precomputed_projection,
    project_pca,
)
from .rag import ChatOrchestrator, SessionStore, TokenBudget, TurnLog
from .saved import SavedPaperStore
from .templates import TemplateStore

logger = logging.getLogger(__name__)

DEFAULT_SPACE = "mock"
DEFAULT_DIMENSION = 64


@dataclass(frozen=True)
class LlmSettings:
    base_url: str = ""
    model: str = ""
    token_limit: int = 16000
    timeout_s: float = 60.0


@dataclass(frozen=True)
class RemoteEmbeddingSettings:
    base_url: str = ""
    model: str = ""
    dimension: int = 1536


@dataclass(frozen=True)
class WorkspaceConfig:
    corpus_path: Path
    embedding_files: dict[str, Path] = field(default_factory=dict)
    projection_files: dict[str, Path] = field(default_factory=dict)
    index_files: dict[str, Path] = field(default_factory=dict)
    default_space: str = DEFAULT_SPACE
    mock_dimension: int = DEFAULT_DIMENSION
    mock_llm: bool = True
    llm: LlmSettings = field(default_factory=LlmSettings)
    embedding: RemoteEmbeddingSettings = field(default_factory=RemoteEmbeddingSettings)
    state_dir: Path | None = None
    ui_dir: Path | None = None

    @classmethod
    def from_file(cls, path: str | Path) -> "WorkspaceConfig":
        """Read a JSON config document; relative paths resolve against the
        config file's directory."""
        path = Path(path)
        try:
            raw = json.loads(path.read_text("utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
        base = path.parent

        def resolve(value: str) -> Path:
            p = Path(value)
            return p if p.is_absolute() else base / p

        def path_map(key: str) -> dict[str, Path]:
            return {name: resolve(v) for name, v in raw.get(key, {}).items()}

        corpus = raw.get("corpus")
        if not corpus:
            raise ConfigurationError("config must name a corpus file")
        llm_raw = raw.get("llm", {})
        emb_raw = raw.get("embedding", {})
        return cls(
            corpus_path=resolve(corpus),
            embedding_files=path_map("embeddings"),
            projection_files=path_map("projections"),
            index_files=path_map("indexes"),
            default_space=raw.get("space", DEFAULT_SPACE),
            mock_dimension=int(raw.get("mock_dimension", DEFAULT_DIMENSION)),
            mock_llm=bool(raw.get("mock_llm", not llm_raw.get("base_url"))),
            llm=LlmSettings(
                base_url=llm_raw.get("base_url", ""),
                model=llm_raw.get("model", ""),
                token_limit=int(llm_raw.get("token_limit", 16000)),
                timeout_s=float(llm_raw.get("timeout_s", 60.0)),
            ),
            embedding=RemoteEmbeddingSettings(
                base_url=emb_raw.get("base_url", ""),
                model=emb_raw.get("model", ""),
                dimension=int(emb_raw.get("dimension", 1536)),
            ),
            state_dir=resolve(raw["state_dir"]) if raw.get("state_dir") else None,
            ui_dir=resolve(raw["ui_dir"]) if raw.get("ui_dir") else None,
        )

    def with_overrides(self, **changes) -> "WorkspaceConfig":
        return replace(self, **changes)


def _peek_dimension(path: Path) -> int:
    """Vector length of the first row of a precomputed-vector file."""
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            stripped = line.strip()
            if not stripped:
                continue
            obj = json.loads(stripped)
            vector = obj.get("vector")
            if not isinstance(vector, list) or not vector:
                raise ConfigurationError(f"{path}: first row has no usable vector")
            return len(vector)
    raise ConfigurationError(f"{path}: no vectors found")


class Workspace:
    """All loaded state plus the chat orchestrator, built from one config."""

    def __init__(self, config: WorkspaceConfig, llm: LlmClient | None = None):
        self.config = config
        self.corpus, self.ingest_report = CorpusStore.empty().ingest(config.corpus_path)
        self.embeddings = EmbeddingStore()
        self._load_spaces()
        self.search = VectorSearch(self.embeddings)
        self._load_indexes()
        self.projections = ProjectionRegistry()
        self._load_projections()

        state = config.state_dir
        if state is not None:
            state.mkdir(parents=True, exist_ok=True)
        self.templates = TemplateStore(state / "templates.json" if state else None)
        self.saved = SavedPaperStore(state / "saved_sets.json" if state else None)
        self.sessions = SessionStore()
        turn_log = TurnLog(state / "chat_log.jsonl") if state else None

        self.llm = llm if llm is not None else self._build_llm()
        self.budget = TokenBudget(model_limit=config.llm.token_limit)
        self._remote_client: RemoteEmbeddingClient | None = None
        if config.embedding.base_url and config.embedding.model:
            self._remote_client = RemoteEmbeddingClient(
                base_url=config.embedding.base_url, model=config.embedding.model
            )
        self.orchestrator = ChatOrchestrator(
            corpus=self.corpus,
            search=self.search,
            embedder=self.embed_query,
            llm=self.llm,
            templates=self.templates,
            budget=self.budget,
            turn_log=turn_log,
        )

    # -- construction helpers --

    def _load_spaces(self) -> None:
        ids = self.corpus.ids()
        for name, path in sorted(self.config.embedding_files.items()):
            provenance = MOCK if name == DEFAULT_SPACE else PRECOMPUTED_FILE
            dimension = _peek_dimension(path)
            self.embeddings.register_space(
                EmbeddingSpace(name=name, dimension=dimension, provenance=provenance)
            )
            report = load_precomputed(self.embeddings, name, path, ids)
            if report.rejected:
                logger.warning(
                    "space %r: %d vector rows rejected", name, len(report.rejected)
                )
        if DEFAULT_SPACE not in self.embeddings.spaces() and self.config.default_space == DEFAULT_SPACE:
            # No vector file for the mock space: embed the corpus in-process.
            space = EmbeddingSpace(
                name=DEFAULT_SPACE, dimension=self.config.mock_dimension, provenance=MOCK
            )
            self.embeddings.register_space(space)
            records = sorted(self.corpus.records(), key=lambda r: r.id)
            vectors = embed_mock([compose_document_text(r) for r in records], space)
            for record, vector in zip(records, vectors):
                self.embeddings.add(DEFAULT_SPACE, record.id, vector)

    def _load_indexes(self) -> None:
        for name, path in sorted(self.config.index_files.items()):
            index = AnnIndex.load(path, self.embeddings)
            if index.space != name:
                raise ConfigurationError(
                    f"index file {path} is for space {index.space!r}, configured as {name!r}"
                )
            self.search.attach_index(index)

    def _load_projections(self) -> None:
        ids = self.corpus.ids()
        for name, path in sorted(self.config.projection_files.items()):
            report = load_precomputed_projection(self.projections, name, path, ids)
            if report.rejected:
                logger.warning(
                    "projection %r: %d rows rejected", name, len(report.rejected)
                )

    def _build_llm(self) -> LlmClient:
        if self.config.mock_llm or not self.config.llm.base_url:
            return TitleEchoLlm()
        return HttpLlmClient(
            base_url=self.config.llm.base_url,
            model=self.config.llm.model,
            timeout=self.config.llm.timeout_s,
        )

    # -- runtime services --

    def validate_ready(self) -> None:
        """Startup gate: a non-empty corpus and at least one populated space."""
        if len(self.corpus) == 0:
            raise ConfigurationError("corpus is empty; ingest records before serving")
        populated = [s for s in self.embeddings.spaces() if self.embeddings.count(s) > 0]
        if not populated:
            raise ConfigurationError("no embedding space has any vectors loaded")

    def loaded_spaces(self) -> list[str]:
        return [s for s in self.embeddings.spaces() if self.embeddings.count(s) > 0]

    def embed_query(self, text: str, space_name: str) -> np.ndarray:
        """Embed free text for query-time search in the given space."""
        space = self.embeddings.space(space_name)
        if space.provenance == MOCK:
            return embed_mock([text], space)[0]
        if self._remote_client is not None:
            remote_space = EmbeddingSpace(
                name=space.name,
                dimension=space.dimension,
                provenance=REMOTE_MODEL,
                model=self.config.embedding.model,
            )
            return self._remote_client.embed([text], remote_space)[0]
        raise ConfigurationError(
            f"space {space_name!r} holds precomputed vectors and no remote "
            "embedding endpoint is configured; text queries are unavailable"
        )

    def batch_embedder(self, space_name: str):
        def embed(texts):
            return [self.embed_query(t, space_name) for t in texts]

        return embed

    def resolve_space(self, requested: str | None) -> str:
        name = requested or self.config.default_space
        if name not in self.embeddings.spaces():
            raise ValidationError(f"unknown embedding space {name!r}")
        return name

    def projection_points(self, space_name: str) -> list[ProjectionPoint]:
        """Points for the space; computed via PCA on first request when no
        precomputed file was loaded."""
        name = self.resolve_space(space_name)
        if self.projections.count(name) == 0:
            points = project_pca(self.embeddings, name)
            self.projections.set_points(name, points)
        return self.projections.points(name)
