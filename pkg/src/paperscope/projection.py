"""2-D coordinates per paper per space: precomputed pass-through and a PCA
baseline, with a trustworthiness statistic as the quality gate."""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .embeddings import EmbeddingStore, LoadReport
from .errors import InsufficientDataError, ValidationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProjectionPoint:
    paper_id: str
    x: float
    y: float


class ProjectionRegistry:
    """At most one (x, y) point per (paper, space). Loads replace per-row,
    so reloading the same file is idempotent."""

    def __init__(self):
        self._points: dict[str, dict[str, tuple[float, float]]] = {}

    def set_points(self, space_name: str, points: Iterable[ProjectionPoint]) -> None:
        table = self._points.setdefault(space_name, {})
        for point in points:
            table[point.paper_id] = (point.x, point.y)

    def points(self, space_name: str) -> list[ProjectionPoint]:
        table = self._points.get(space_name, {})
        return [ProjectionPoint(pid, xy[0], xy[1]) for pid, xy in sorted(table.items())]

    def count(self, space_name: str) -> int:
        return len(self._points.get(space_name, {}))

    def spaces(self) -> list[str]:
        return sorted(self._points)


def load_precomputed_projection(
    registry: ProjectionRegistry,
    space_name: str,
    source: str | Path | Iterable[str],
    known_ids: Iterable[str],
) -> LoadReport:
    """Load a line-delimited {"id", "x", "y"} file. Rows with unknown ids or
    non-finite coordinates are rejected with reasons."""
    known = set(known_ids)
    report = LoadReport()
    accepted: list[ProjectionPoint] = []
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
            x, y = obj.get("x"), obj.get("y")
            if not isinstance(paper_id, str) or not isinstance(x, (int, float)) or not isinstance(y, (int, float)):
                report.rejected.append((line_no, "row must have id, x, y fields"))
                continue
            if paper_id not in known:
                report.rejected.append((line_no, f"unknown paper id {paper_id!r}"))
                continue
            if not (math.isfinite(x) and math.isfinite(y)):
                report.rejected.append((line_no, "non-finite coordinates"))
                continue
            accepted.append(ProjectionPoint(paper_id, float(x), float(y)))
            report.accepted += 1
    finally:
        if isinstance(source, (str, Path)):
            lines.close()  # type: ignore[union-attr]
    registry.set_points(space_name, accepted)
    return report


def project_pca(store: EmbeddingStore, space_name: str) -> list[ProjectionPoint]:
    """Project onto the top-2 principal components of the mean-centered
    vectors. Input rows are taken in id order, so the result is exactly
    invariant under registration order; each component's sign is fixed by
    making its largest-magnitude loading positive."""
    ids, matrix = store.matrix(space_name)
    if len(ids) < 3:
        raise InsufficientDataError(
            f"PCA needs at least 3 vectors, space {space_name!r} has {len(ids)}"
        )
    centered = matrix - matrix.mean(axis=0)
    _, _, vt = np.linalg.svd(centered, full_matrices=False)
    components = vt[:2].copy()
    for row in range(components.shape[0]):
        lead = int(np.argmax(np.abs(components[row])))
        if components[row, lead] < 0:
            components[row] = -components[row]
    coords = centered @ components.T
    return [
        ProjectionPoint(pid, float(coords[i, 0]), float(coords[i, 1]))
        for i, pid in enumerate(ids)
    ]


def trustworthiness(
    store: EmbeddingStore,
    space_name: str,
    points: Sequence[ProjectionPoint],
    k: int,
) -> float:
    """Standard trustworthiness statistic in [0, 1]: penalizes 2-D neighbors
    that are not high-dimensional neighbors, weighted by how far down the
    high-dimensional ranking they sit.
    """
    n = len(points)
    if n < 2:
        raise ValidationError("trustworthiness needs at least 2 points")
    if k >= n:
        raise ValidationError(f"k ({k}) must be < number of points ({n})")
    denom = n * k * (2 * n - 3 * k - 1)
    if denom <= 0:
        raise ValidationError(f"k ({k}) too large for {n} points; statistic undefined")
    high = np.stack([store.require(space_name, p.paper_id) for p in points])
    low = np.array([[p.x, p.y] for p in points], dtype=np.float64)

    def _ranked_neighbors(data: np.ndarray) -> np.ndarray:
        # Pairwise squared euclidean; self excluded; ties broken by index.
        sq = np.sum(data**2, axis=1)
        d2 = sq[:, None] + sq[None, :] - 2.0 * (data @ data.T)
        np.fill_diagonal(d2, np.inf)
        return np.argsort(d2, axis=1, kind="stable")

    high_order = _ranked_neighbors(high)
    low_order = _ranked_neighbors(low)
    # rank[i][j] = 1-based position of j among i's high-dimensional neighbors
    rank = np.empty((n, n), dtype=np.int64)
    for i in range(n):
        rank[i, high_order[i]] = np.arange(1, n + 1)
    penalty = 0
    for i in range(n):
        high_set = set(high_order[i, :k].tolist())
        for j in low_order[i, :k]:
            if int(j) not in high_set:
                penalty += rank[i, j] - k
    return 1.0 - (2.0 / denom) * penalty


def write_projection(path: str | Path, points: Iterable[ProjectionPoint]) -> int:
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for point in points:
            fh.write(json.dumps({"id": point.paper_id, "x": point.x, "y": point.y}) + "\n")
            count += 1
    return count
