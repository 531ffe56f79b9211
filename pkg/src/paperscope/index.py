"""Exact and approximate nearest-neighbor cosine search over an embedding space.

The exact path is a full matrix scan (the ground-truth oracle). The
approximate path is a single-layer proximity graph: each node links to its
near neighbors, queries walk the graph with a best-first beam. Build and
query are fully deterministic: insertion order is the id-sorted order, there
is no randomness, and ties always break by ascending position/id.
"""

from __future__ import annotations

import heapq
import json
import logging
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Callable, Collection, Sequence

import numpy as np

from .corpus import PaperRecord
from .embeddings import EmbeddingStore, EmbeddingVector, check_space, compose_document_text, normalize
from .errors import DegenerateSeedError, ValidationError

logger = logging.getLogger(__name__)

DEFAULT_K = 25

INDEX_FORMAT_VERSION = 1

ENTRY_POINTS = 8


@dataclass(frozen=True)
class SearchHit:
    paper_id: str
    score: float


@dataclass(frozen=True)
class AnnIndexConfig:
    neighbors_per_node: int = 16
    build_beam: int = 128
    query_beam: int = 64

    def __post_init__(self):
        if min(self.neighbors_per_node, self.build_beam, self.query_beam) < 1:
            raise ValidationError("index parameters must all be >= 1")


def cosine(a: EmbeddingVector, b: EmbeddingVector) -> float:
    """Dot product of unit vectors, clamped to [-1, 1]."""
    check_space(a.space, b)
    return float(np.clip(np.dot(a.components, b.components), -1.0, 1.0))


def _as_array(seed: EmbeddingVector | np.ndarray) -> np.ndarray:
    # Normalize at the boundary so scores are true cosines even for raw arrays.
    if isinstance(seed, EmbeddingVector):
        return seed.components
    return normalize(np.asarray(seed, dtype=np.float64))


def search_exact(
    store: EmbeddingStore,
    space_name: str,
    seed: EmbeddingVector | np.ndarray,
    k: int = DEFAULT_K,
    exclude: Collection[str] = (),
) -> list[SearchHit]:
    """Full-scan ground truth: the k highest-cosine papers not in exclude,
    ordered by (score desc, paper_id asc)."""
    if k < 1:
        raise ValidationError("k must be >= 1")
    query = _as_array(seed)
    ids, matrix = store.matrix(space_name)
    if not ids:
        return []
    scores = np.clip(matrix @ query, -1.0, 1.0)
    # ids are sorted ascending, so a stable sort on -score breaks ties by id.
    order = np.argsort(-scores, kind="stable")
    excluded = set(exclude)
    hits: list[SearchHit] = []
    for pos in order:
        pid = ids[pos]
        if pid in excluded:
            continue
        hits.append(SearchHit(pid, float(scores[pos])))
        if len(hits) == k:
            break
    return hits


class AnnIndex:
    """Navigable proximity graph over one embedding space.

    Nodes are inserted in id order; each new node beam-searches the partial
    graph and links to its nearest neighbors_per_node nodes (bidirectional,
    degrees capped at twice that). Queries run a best-first beam of width
    query_beam seeded from a fixed set of spread-out entry points, so a
    single unlucky start cannot strand the walk in one region.
    """

    def __init__(
        self,
        space: str,
        dimension: int,
        config: AnnIndexConfig,
        ids: list[str],
        adjacency: list[list[int]],
        matrix: np.ndarray,
        entries: list[int],
    ):
        self.space = space
        self.dimension = dimension
        self.config = config
        self.ids = ids
        self.adjacency = adjacency
        self._matrix = matrix
        self.entries = entries

    def __len__(self) -> int:
        return len(self.ids)

    @classmethod
    def build(
        cls, store: EmbeddingStore, space_name: str, config: AnnIndexConfig | None = None
    ) -> "AnnIndex":
        config = config or AnnIndexConfig()
        space = store.space(space_name)
        ids, matrix = store.matrix(space_name)
        if not ids:
            raise ValidationError(f"space {space_name!r} has no vectors to index")
        n = len(ids)
        adjacency: list[list[int]] = [[] for _ in range(n)]
        index = cls(space_name, space.dimension, config, ids, adjacency, matrix, entries=[0])
        max_degree = 2 * config.neighbors_per_node
        for i in range(1, n):
            found = index._beam_search(matrix[i], ef=config.build_beam)
            found.sort(key=lambda t: (-t[0], t[1]))
            for j in index._select_diverse(found, config.neighbors_per_node):
                adjacency[i].append(j)
                adjacency[j].append(i)
                if len(adjacency[j]) > max_degree:
                    index._prune(j, max_degree)
        for neighbors in adjacency:
            neighbors.sort()
        index.entries = index._spread_entries()
        logger.info(
            "built proximity graph over %d vectors in space %r (M=%d)",
            n, space_name, config.neighbors_per_node,
        )
        return index

    def _select_diverse(self, ranked: list[tuple[float, int]], limit: int) -> list[int]:
        """Relative-neighborhood link selection. ranked holds (score, pos)
        pairs sorted by (score desc, pos asc); a candidate is kept only when
        it is closer to the anchor than to every neighbor kept so far, which
        preserves long-range links instead of forming one tight clique.
        Nearest rejects backfill the list up to limit."""
        kept: list[int] = []
        rejected: list[int] = []
        for score, pos in ranked:
            if len(kept) == limit:
                break
            if kept and score <= float(np.max(self._matrix[kept] @ self._matrix[pos])):
                rejected.append(pos)
            else:
                kept.append(pos)
        kept.extend(rejected[: limit - len(kept)])
        return kept

    def _prune(self, node: int, max_degree: int) -> None:
        neighbors = self.adjacency[node]
        sims = self._matrix[neighbors] @ self._matrix[node]
        ranked = sorted(zip(sims, neighbors), key=lambda t: (-t[0], t[1]))
        self.adjacency[node] = self._select_diverse(ranked, max_degree)

    def _medoid(self) -> int:
        mean = self._matrix.mean(axis=0)
        if float(np.linalg.norm(mean)) < 1e-12:
            return 0
        return int(np.argmax(self._matrix @ normalize(mean)))

    def _spread_entries(self, count: int = ENTRY_POINTS) -> list[int]:
        """Medoid plus farthest-point-sampled starts. Deterministic: argmin
        breaks ties at the first occurrence, so entry choice never drifts."""
        n = len(self.ids)
        first = self._medoid()
        if n <= count:
            return [first] + [i for i in range(n) if i != first]
        chosen = [first]
        max_sim = self._matrix @ self._matrix[first]
        max_sim[first] = np.inf
        while len(chosen) < count:
            nxt = int(np.argmin(max_sim))
            chosen.append(nxt)
            np.maximum(max_sim, self._matrix @ self._matrix[nxt], out=max_sim)
            max_sim[nxt] = np.inf
        return chosen

    def _beam_search(self, query: np.ndarray, ef: int) -> list[tuple[float, int]]:
        """Best-first walk seeded from every entry point; returns up to ef
        (score, pos) pairs. At small graph sizes the walk exhausts every
        reachable node."""
        entries = self.entries
        scores = self._matrix[entries] @ query
        visited = set(entries)
        candidates = [(-float(s), e) for e, s in zip(entries, scores)]  # max-heap via negation
        best = [(float(s), e) for e, s in zip(entries, scores)]  # min-heap, size <= ef
        heapq.heapify(candidates)
        heapq.heapify(best)
        while len(best) > ef:
            heapq.heappop(best)
        while candidates:
            neg_score, pos = heapq.heappop(candidates)
            if len(best) >= ef and -neg_score < best[0][0]:
                break
            frontier = [nb for nb in self.adjacency[pos] if nb not in visited]
            if not frontier:
                continue
            visited.update(frontier)
            sims = self._matrix[frontier] @ query
            for nb, sim in zip(frontier, sims):
                sim = float(sim)
                if len(best) < ef:
                    heapq.heappush(best, (sim, nb))
                    heapq.heappush(candidates, (-sim, nb))
                elif sim > best[0][0]:
                    heapq.heappushpop(best, (sim, nb))
                    heapq.heappush(candidates, (-sim, nb))
        return best

    def search(
        self,
        seed: EmbeddingVector | np.ndarray,
        k: int = DEFAULT_K,
        exclude: Collection[str] = (),
    ) -> list[SearchHit]:
        """As search_exact but approximate; same ordering contract."""
        if k < 1:
            raise ValidationError("k must be >= 1")
        if self.config.query_beam < k:
            raise ValidationError(
                f"query_beam ({self.config.query_beam}) must be >= k ({k})"
            )
        query = _as_array(seed)
        excluded = set(exclude)
        found = self._beam_search(query, ef=self.config.query_beam + len(excluded))
        scored = [
            (float(np.clip(score, -1.0, 1.0)), self.ids[pos])
            for score, pos in found
            if self.ids[pos] not in excluded
        ]
        scored.sort(key=lambda t: (-t[0], t[1]))
        return [SearchHit(pid, score) for score, pid in scored[:k]]

    def save(self, path: str | Path) -> None:
        """Persist (space, config, adjacency, id table) as canonical JSON.

        Vectors are not stored; load() reattaches them from an EmbeddingStore.
        """
        doc = {
            "format_version": INDEX_FORMAT_VERSION,
            "space": self.space,
            "dimension": self.dimension,
            "config": asdict(self.config),
            "entries": self.entries,
            "ids": self.ids,
            "adjacency": self.adjacency,
        }
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")

    @classmethod
    def load(cls, path: str | Path, store: EmbeddingStore) -> "AnnIndex":
        with open(path, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
        version = doc.get("format_version")
        if version != INDEX_FORMAT_VERSION:
            raise ValidationError(f"unsupported index format version {version!r}")
        space = store.space(doc["space"])
        if space.dimension != doc["dimension"]:
            raise ValidationError(
                f"index dimension {doc['dimension']} does not match space "
                f"{space.name!r} dimension {space.dimension}"
            )
        ids = list(doc["ids"])
        rows = []
        for pid in ids:
            vec = store.get(space.name, pid)
            if vec is None:
                raise ValidationError(f"store lacks a vector for indexed paper {pid!r}")
            rows.append(vec)
        return cls(
            space=space.name,
            dimension=space.dimension,
            config=AnnIndexConfig(**doc["config"]),
            ids=ids,
            adjacency=[list(row) for row in doc["adjacency"]],
            matrix=np.stack(rows),
            entries=[int(e) for e in doc["entries"]],
        )


def centroid_seed(vectors: Sequence[EmbeddingVector]) -> EmbeddingVector:
    """Component-wise mean of same-space unit vectors, re-normalized."""
    if not vectors:
        raise ValidationError("centroid of an empty vector list")
    space = vectors[0].space
    for vec in vectors[1:]:
        check_space(space, vec)
    mean = np.mean([v.components for v in vectors], axis=0)
    if float(np.linalg.norm(mean)) < 1e-12:
        raise DegenerateSeedError("seed vectors cancel out; centroid has no direction")
    return EmbeddingVector(space=space, components=normalize(mean))


class VectorSearch:
    """Similarity-search front door: routes to the ANN graph when one is
    built for the space, else to the exact full scan."""

    def __init__(self, store: EmbeddingStore):
        self.store = store
        self._indexes: dict[str, AnnIndex] = {}

    def build_index(self, space_name: str, config: AnnIndexConfig | None = None) -> AnnIndex:
        index = AnnIndex.build(self.store, space_name, config)
        self._indexes[space_name] = index
        return index

    def attach_index(self, index: AnnIndex) -> None:
        self._indexes[index.space] = index

    def index_for(self, space_name: str) -> AnnIndex | None:
        return self._indexes.get(space_name)

    def search(
        self,
        space_name: str,
        seed: EmbeddingVector | np.ndarray,
        k: int = DEFAULT_K,
        exclude: Collection[str] = (),
        exact: bool = False,
    ) -> list[SearchHit]:
        index = self._indexes.get(space_name)
        if exact or index is None:
            return search_exact(self.store, space_name, seed, k=k, exclude=exclude)
        return index.search(seed, k=k, exclude=exclude)

    def similar_by_papers(
        self,
        seed_ids: Sequence[str],
        space_name: str,
        k: int = DEFAULT_K,
        threshold: float | None = None,
        exact: bool = False,
    ) -> list[SearchHit]:
        """Search around the centroid of the seed papers, seeds excluded.
        Hits scoring <= threshold are dropped when a threshold is given."""
        if not seed_ids:
            raise ValidationError("at least one seed paper id is required")
        seeds = [
            EmbeddingVector(space=space_name, components=self.store.require(space_name, sid))
            for sid in seed_ids
        ]
        centroid = centroid_seed(seeds)
        hits = self.search(space_name, centroid, k=k, exclude=set(seed_ids), exact=exact)
        if threshold is not None:
            hits = [h for h in hits if h.score > threshold]
        return hits

    def similar_by_text(
        self,
        title: str,
        abstract: str,
        space_name: str,
        embed: Callable[[Sequence[str]], list[np.ndarray]],
        k: int = DEFAULT_K,
        exact: bool = False,
    ) -> list[SearchHit]:
        """Embed a work-in-progress title/abstract and search the space."""
        title = title.strip()
        abstract = abstract.strip()
        if not title and not abstract:
            raise ValidationError("title and abstract cannot both be empty")
        text = compose_document_text(PaperRecord(id="query", title=title, abstract=abstract))
        seed = embed([text])[0]
        return self.search(space_name, seed, k=k, exact=exact)
