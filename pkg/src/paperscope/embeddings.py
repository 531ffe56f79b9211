"""Embedding spaces, vector registry, document-text composition, and providers.

Every vector is L2-normalized at the boundary so cosine similarity is a plain
dot product everywhere downstream. Providers: a remote HTTP model API, a
deterministic offline mock, and precomputed-vector files.
"""

from __future__ import annotations

import hashlib
import json
import logging
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .corpus import PaperRecord, tokenize
from .errors import (
    ConfigurationError,
    MissingEmbeddingError,
    ProtocolError,
    SpaceMismatchError,
    TransientProviderError,
    ValidationError,
)

logger = logging.getLogger(__name__)

REMOTE_MODEL = "remote-model"
PRECOMPUTED_FILE = "precomputed-file"
MOCK = "mock"

NORM_TOLERANCE = 1e-6
MOCK_SEED = 13


@dataclass(frozen=True)
class EmbeddingSpace:
    """A named vector space; all vectors in it share one dimension."""

    name: str
    dimension: int
    provenance: str  # REMOTE_MODEL | PRECOMPUTED_FILE | MOCK
    model: str | None = None

    def __post_init__(self):
        if self.dimension < 1:
            raise ValidationError("dimension must be >= 1")
        if self.provenance not in (REMOTE_MODEL, PRECOMPUTED_FILE, MOCK):
            raise ValidationError(f"unknown provenance {self.provenance!r}")


@dataclass(frozen=True, eq=False)
class EmbeddingVector:
    space: str
    components: np.ndarray

    @classmethod
    def of(cls, space: str, values: Sequence[float] | np.ndarray) -> "EmbeddingVector":
        return cls(space=space, components=normalize(np.asarray(values, dtype=np.float64)))


def normalize(values: np.ndarray) -> np.ndarray:
    """Unit-normalize, rejecting zero or non-finite input."""
    arr = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValidationError("vector has non-finite components")
    norm = float(np.linalg.norm(arr))
    if norm < 1e-12:
        raise ValidationError("zero vector cannot be normalized")
    return arr / norm


def compose_document_text(record: PaperRecord) -> str:
    """Deterministic labeled-segment text for embedding: title, authors,
    venue, year, keywords, abstract. Missing fields are omitted entirely."""
    segments = []
    if record.title:
        segments.append(f"Title: {record.title}")
    if record.authors:
        segments.append(f"Authors: {', '.join(record.authors)}")
    if record.venue:
        segments.append(f"Venue: {record.venue}")
    if record.year is not None:
        segments.append(f"Year: {record.year}")
    if record.keywords:
        segments.append(f"Keywords: {', '.join(record.keywords)}")
    if record.abstract.strip():
        segments.append(f"Abstract: {record.abstract}")
    return "\n".join(segments)


class EmbeddingStore:
    """Registry of spaces and their unit vectors, keyed by paper id.

    Appends are accepted until the per-space matrix is first requested; the
    matrix view (ids sorted ascending) is cached and invalidated on add.
    """

    def __init__(self):
        self._spaces: dict[str, EmbeddingSpace] = {}
        self._vectors: dict[str, dict[str, np.ndarray]] = {}
        self._matrix_cache: dict[str, tuple[list[str], np.ndarray]] = {}

    def register_space(self, space: EmbeddingSpace) -> None:
        existing = self._spaces.get(space.name)
        if existing is not None and existing != space:
            raise ValidationError(f"space {space.name!r} already registered differently")
        self._spaces[space.name] = space
        self._vectors.setdefault(space.name, {})

    def space(self, name: str) -> EmbeddingSpace:
        try:
            return self._spaces[name]
        except KeyError:
            raise ValidationError(f"unknown embedding space {name!r}") from None

    def spaces(self) -> list[str]:
        return sorted(self._spaces)

    def add(self, space_name: str, paper_id: str, values: Sequence[float] | np.ndarray) -> None:
        space = self.space(space_name)
        arr = np.asarray(values, dtype=np.float64)
        if arr.shape != (space.dimension,):
            raise ValidationError(
                f"vector has {arr.shape[0] if arr.ndim == 1 else arr.shape} components, "
                f"space {space_name!r} requires {space.dimension}"
            )
        self._vectors[space_name][paper_id] = normalize(arr)
        self._matrix_cache.pop(space_name, None)

    def get(self, space_name: str, paper_id: str) -> np.ndarray | None:
        self.space(space_name)
        return self._vectors[space_name].get(paper_id)

    def require(self, space_name: str, paper_id: str) -> np.ndarray:
        vec = self.get(space_name, paper_id)
        if vec is None:
            raise MissingEmbeddingError(paper_id, space_name)
        return vec

    def count(self, space_name: str) -> int:
        self.space(space_name)
        return len(self._vectors[space_name])

    def ids(self, space_name: str) -> list[str]:
        self.space(space_name)
        return sorted(self._vectors[space_name])

    def matrix(self, space_name: str) -> tuple[list[str], np.ndarray]:
        """(ids sorted ascending, row-aligned matrix) for full-scan search."""
        cached = self._matrix_cache.get(space_name)
        if cached is not None:
            return cached
        space = self.space(space_name)
        ids = self.ids(space_name)
        if ids:
            mat = np.stack([self._vectors[space_name][i] for i in ids])
        else:
            mat = np.empty((0, space.dimension), dtype=np.float64)
        self._matrix_cache[space_name] = (ids, mat)
        return ids, mat


# --- deterministic mock provider ---

_gram_cache: dict[tuple[str, int, int, str], np.ndarray] = {}


def _gram_vector(space_name: str, dimension: int, seed: int, gram: str) -> np.ndarray:
    key = (space_name, dimension, seed, gram)
    vec = _gram_cache.get(key)
    if vec is None:
        digest = hashlib.blake2b(
            f"{space_name}|{seed}|{gram}".encode("utf-8"), digest_size=8
        ).digest()
        rng = np.random.default_rng(int.from_bytes(digest, "big"))
        vec = rng.standard_normal(dimension)
        _gram_cache[key] = vec
    return vec


def embed_mock(
    texts: Sequence[str], space: EmbeddingSpace, seed: int = MOCK_SEED
) -> list[np.ndarray]:
    """Deterministic hash-feature embedding: each token and token bigram maps
    to a fixed pseudo-random direction; the text vector is their weighted sum,
    unit-normalized. Pure function of (text, space.name, seed)."""
    if space.provenance != MOCK:
        raise ValidationError(f"space {space.name!r} is not a mock space")
    out = []
    for text in texts:
        tokens = tokenize(text)
        acc = np.zeros(space.dimension)
        if not tokens:
            acc += _gram_vector(space.name, space.dimension, seed, "<empty>")
        else:
            for token in tokens:
                acc += _gram_vector(space.name, space.dimension, seed, token)
            for a, b in zip(tokens, tokens[1:]):
                acc += 0.5 * _gram_vector(space.name, space.dimension, seed, f"{a} {b}")
        out.append(normalize(acc))
    return out


# --- remote provider ---

def _httpx_transport(url: str, payload: dict, headers: dict, timeout: float):
    import httpx

    try:
        response = httpx.post(url, json=payload, headers=headers, timeout=timeout)
    except httpx.HTTPError as exc:
        raise ConnectionError(str(exc)) from exc
    return response.status_code, response.json()


class RemoteEmbeddingClient:
    """HTTP embedding provider: POST {model, input[]} -> {data[].embedding[]}.

    Batches requests (<= batch_size texts per call), retries transient
    failures with exponential backoff, and normalizes vectors on receipt.
    """

    def __init__(
        self,
        base_url: str,
        model: str,
        api_key: str | None = None,
        batch_size: int = 64,
        max_attempts: int = 3,
        timeout: float = 30.0,
        parallelism: int = 4,
        transport: Callable = _httpx_transport,
        backoff_base: float = 0.5,
        sleep: Callable[[float], None] = time.sleep,
    ):
        if batch_size < 1 or max_attempts < 1 or parallelism < 1:
            raise ValidationError("batch_size, max_attempts, parallelism must be >= 1")
        self.base_url = base_url
        self.model = model
        self.api_key = api_key if api_key is not None else os.environ.get("LLM_API_KEY")
        self.batch_size = batch_size
        self.max_attempts = max_attempts
        self.timeout = timeout
        self.parallelism = parallelism
        self._transport = transport
        self._backoff_base = backoff_base
        self._sleep = sleep

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        return headers

    def _call_batch(self, batch: list[str], indices: list[int], space: EmbeddingSpace):
        payload = {"model": self.model, "input": batch}
        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            try:
                status, body = self._transport(
                    self.base_url, payload, self._headers(), self.timeout
                )
            except ConnectionError as exc:
                last_error = exc
                self._sleep(self._backoff_base * (2**attempt))
                continue
            if status in (401, 403):
                raise ConfigurationError(f"provider rejected credentials (HTTP {status})")
            if status == 429 or status >= 500:
                last_error = ProtocolError(f"HTTP {status}")
                self._sleep(self._backoff_base * (2**attempt))
                continue
            if status != 200:
                raise ProtocolError(f"provider returned HTTP {status}")
            data = body.get("data")
            if not isinstance(data, list) or len(data) != len(batch):
                raise ProtocolError(
                    f"provider returned {len(data) if isinstance(data, list) else 'no'} "
                    f"embeddings for {len(batch)} inputs"
                )
            vectors = []
            for item in data:
                embedding = item.get("embedding")
                if not isinstance(embedding, list):
                    raise ProtocolError("response item lacks an embedding array")
                if len(embedding) != space.dimension:
                    raise ProtocolError(
                        f"provider returned {len(embedding)} dims, "
                        f"space {space.name!r} requires {space.dimension}"
                    )
                vectors.append(normalize(np.asarray(embedding, dtype=np.float64)))
            return vectors
        raise TransientProviderError(
            f"batch failed after {self.max_attempts} attempts: {last_error}",
            failed_indices=indices,
        )

    def embed(self, texts: Sequence[str], space: EmbeddingSpace) -> list[np.ndarray]:
        if space.provenance != REMOTE_MODEL:
            raise ValidationError(f"space {space.name!r} is not a remote-model space")
        batches = [
            (list(texts[i : i + self.batch_size]), list(range(i, min(i + self.batch_size, len(texts)))))
            for i in range(0, len(texts), self.batch_size)
        ]
        if not batches:
            return []
        if len(batches) == 1 or self.parallelism == 1:
            results = [self._call_batch(batch, idx, space) for batch, idx in batches]
        else:
            with ThreadPoolExecutor(max_workers=self.parallelism) as pool:
                futures = [pool.submit(self._call_batch, batch, idx, space) for batch, idx in batches]
                results = [f.result() for f in futures]
        return [vec for chunk in results for vec in chunk]


# --- precomputed vector files ---

@dataclass
class LoadReport:
    accepted: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)


def load_precomputed(
    store: EmbeddingStore,
    space_name: str,
    source: str | Path | Iterable[str],
    known_ids: Iterable[str],
) -> LoadReport:
    """Load a line-delimited {"id", "vector"} file into the store.

    Rows referencing unknown paper ids, with the wrong dimension, or holding
    non-normalizable vectors are rejected with reasons.
    """
    space = store.space(space_name)
    known = set(known_ids)
    report = LoadReport()
    if isinstance(source, (str, Path)):
        lines: Iterable[str] = open(source, "r", encoding="utf-8")
    else:
        lines = source
    try:
        for line_no, line in enumerate(lines, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                report.rejected.append((line_no, f"invalid JSON: {exc.msg}"))
                continue
            paper_id = obj.get("id")
            vector = obj.get("vector")
            if not isinstance(paper_id, str) or not isinstance(vector, list):
                report.rejected.append((line_no, "row must have id and vector fields"))
                continue
            if paper_id not in known:
                report.rejected.append((line_no, f"unknown paper id {paper_id!r}"))
                continue
            if len(vector) != space.dimension:
                report.rejected.append(
                    (line_no, f"vector has {len(vector)} dims, space requires {space.dimension}")
                )
                continue
            try:
                store.add(space_name, paper_id, vector)
            except ValidationError as exc:
                report.rejected.append((line_no, str(exc)))
                continue
            report.accepted += 1
    finally:
        if isinstance(source, (str, Path)):
            lines.close()  # type: ignore[union-attr]
    logger.info(
        "loaded %d vectors into space %r (%d rejected)",
        report.accepted, space_name, len(report.rejected),
    )
    return report


def write_vectors(
    path: str | Path, entries: Iterable[tuple[str, np.ndarray | Sequence[float]]]
) -> int:
    """Write (paper id, vector) rows as a precomputed-vector file."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for paper_id, vector in entries:
            row = {"id": paper_id, "vector": [float(x) for x in np.asarray(vector)]}
            fh.write(json.dumps(row) + "\n")
            count += 1
    return count


def check_space(expected: str, vector: EmbeddingVector) -> None:
    if vector.space != expected:
        raise SpaceMismatchError(f"vector from space {vector.space!r}, expected {expected!r}")
