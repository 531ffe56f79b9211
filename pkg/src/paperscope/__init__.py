"""Self-hosted literature exploration: corpus search, embedding similarity,
2-D maps, and a retrieval-augmented chat with grounded citations."""
from __future__ import annotations

from .corpus import CorpusStore, PaperRecord
from .embeddings import EmbeddingSpace, EmbeddingStore
from .index import AnnIndex, SearchHit, VectorSearch
from .workspace import Workspace, WorkspaceConfig

__version__ = "0.1.0"

__all__ = [
    "AnnIndex",
    "CorpusStore",
    "EmbeddingSpace",
    "EmbeddingStore",
    "PaperRecord",
    "SearchHit",
    "VectorSearch",
    "Workspace",
    "WorkspaceConfig",
    "__version__",
]
