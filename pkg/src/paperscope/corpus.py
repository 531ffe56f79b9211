"""Paper-metadata corpus: ingestion, dedup, keyword search, and meta aggregations.

The corpus file format is JSON Lines: one object per line with fields
``id, title, abstract, authors, keywords, venue, year, citation_count,
source_url``. Absent optional fields are omitted, never null.
"""

from __future__ import annotations

import hashlib
import json
import logging
import re
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from .errors import NotFoundError, ValidationError

logger = logging.getLogger(__name__)

SEARCHABLE_FIELDS = ("title", "abstract", "keywords", "authors")

_TOKEN_RE = re.compile(r"[^\W_]+", re.UNICODE)


def tokenize(text: str) -> list[str]:
    """Lowercase tokens split on Unicode whitespace and punctuation. No stemming."""
    return _TOKEN_RE.findall(text.lower())


def normalize_title(title: str) -> str:
    """Lowercased, punctuation-stripped, whitespace-collapsed title."""
    return " ".join(tokenize(title))


@dataclass(frozen=True)
class PaperRecord:
    """One paper's metadata row. Immutable; authors/keywords are tuples."""

    id: str
    title: str
    abstract: str = ""
    authors: tuple[str, ...] = ()
    keywords: tuple[str, ...] = ()
    venue: str = ""
    year: int | None = None
    citation_count: int | None = None
    source_url: str | None = None

    def dedup_key(self) -> tuple[str, int | None]:
        return (normalize_title(self.title), self.year)

    def to_dict(self) -> dict:
        """Corpus-file-format object; optional fields omitted when absent."""
        d: dict = {"id": self.id, "title": self.title}
        if self.abstract:
            d["abstract"] = self.abstract
        if self.authors:
            d["authors"] = list(self.authors)
        if self.keywords:
            d["keywords"] = list(self.keywords)
        if self.venue:
            d["venue"] = self.venue
        if self.year is not None:
            d["year"] = self.year
        if self.citation_count is not None:
            d["citation_count"] = self.citation_count
        if self.source_url is not None:
            d["source_url"] = self.source_url
        return d


def _derived_id(key: tuple[str, int | None]) -> str:
    digest = hashlib.sha256(f"{key[0]}|{key[1]}".encode("utf-8")).hexdigest()
    return f"h{digest[:16]}"


def parse_record(obj: dict) -> PaperRecord:
    """Build a validated PaperRecord from a corpus-file object.

    Raises ValidationError with a short reason on any malformed field.
    """
    if not isinstance(obj, dict):
        raise ValidationError("record is not an object")
    title = obj.get("title")
    if not isinstance(title, str) or not title.strip():
        raise ValidationError("missing or empty title")
    title = " ".join(title.split())

    year = obj.get("year")
    if year is not None:
        if not isinstance(year, int) or isinstance(year, bool):
            raise ValidationError("year is not an integer")
        if not 1900 <= year <= 2100:
            raise ValidationError(f"year {year} outside [1900, 2100]")

    citations = obj.get("citation_count")
    if citations is not None:
        if not isinstance(citations, int) or isinstance(citations, bool):
            raise ValidationError("citation_count is not an integer")
        if citations < 0:
            raise ValidationError("citation_count is negative")

    def _str_list(key: str) -> tuple[str, ...]:
        value = obj.get(key, [])
        if not isinstance(value, (list, tuple)) or any(not isinstance(v, str) for v in value):
            raise ValidationError(f"{key} is not a list of strings")
        return tuple(value)

    authors = _str_list("authors")
    keywords = _str_list("keywords")

    abstract = obj.get("abstract", "")
    if not isinstance(abstract, str):
        raise ValidationError("abstract is not a string")
    venue = obj.get("venue", "")
    if not isinstance(venue, str):
        raise ValidationError("venue is not a string")
    source_url = obj.get("source_url")
    if source_url is not None and not isinstance(source_url, str):
        raise ValidationError("source_url is not a string")

    record_id = obj.get("id")
    if record_id is not None and (not isinstance(record_id, str) or not record_id):
        raise ValidationError("id is not a non-empty string")
    if record_id is None:
        record_id = _derived_id((normalize_title(title), year))

    return PaperRecord(
        id=record_id,
        title=title,
        abstract=abstract,
        authors=authors,
        keywords=keywords,
        venue=venue,
        year=year,
        citation_count=citations,
        source_url=source_url,
    )


@dataclass
class IngestReport:
    accepted: int = 0
    rejected: list[tuple[int, str]] = field(default_factory=list)


@dataclass
class CorpusStats:
    paper_count: int
    by_year: dict[int, int]
    by_venue: dict[str, int]
    top_keywords: list[tuple[str, int]]


def _iter_lines(source: str | Path | Iterable[str]) -> Iterator[str]:
    if isinstance(source, (str, Path)):
        with open(source, "r", encoding="utf-8") as fh:
            yield from fh
    else:
        yield from source


class CorpusStore:
    """Immutable-after-ingest corpus of PaperRecords.

    ``ingest`` never mutates the receiver; it returns a new store so a loaded
    corpus can be shared across threads and swapped atomically.
    """

    def __init__(self, records: dict[str, PaperRecord] | None = None):
        self._records: dict[str, PaperRecord] = dict(records or {})
        self._dedup: dict[tuple[str, int | None], str] = {
            r.dedup_key(): r.id for r in self._records.values()
        }
        self._search_cache: dict[str, dict[str, Counter]] = {}

    @classmethod
    def empty(cls) -> "CorpusStore":
        return cls()

    def __len__(self) -> int:
        return len(self._records)

    def __contains__(self, paper_id: str) -> bool:
        return paper_id in self._records

    def ids(self) -> list[str]:
        return list(self._records)

    def records(self) -> list[PaperRecord]:
        return list(self._records.values())

    def ingest(self, source: str | Path | Iterable[str]) -> tuple["CorpusStore", IngestReport]:
        """Ingest a corpus file into a new store.

        Duplicates (same normalized title + year, against this store and within
        the file) collapse to the first occurrence and are reported. A missing
        or unreadable file aborts with no partial state; malformed lines are
        reported and skipped.
        """
        lines = _iter_lines(source)
        report = IngestReport()
        merged = dict(self._records)
        dedup = dict(self._dedup)
        for line_no, line in enumerate(lines, start=1):
            stripped = line.strip()
            if not stripped:
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                report.rejected.append((line_no, f"invalid JSON: {exc.msg}"))
                continue
            try:
                record = parse_record(obj)
            except ValidationError as exc:
                report.rejected.append((line_no, str(exc)))
                continue
            if record.dedup_key() in dedup:
                report.rejected.append((line_no, "duplicate"))
                continue
            if record.id in merged:
                report.rejected.append((line_no, f"id {record.id!r} already in corpus"))
                continue
            merged[record.id] = record
            dedup[record.dedup_key()] = record.id
            report.accepted += 1
        logger.info("ingested %d records (%d rejected)", report.accepted, len(report.rejected))
        return CorpusStore(merged), report

    def get_paper(self, paper_id: str) -> PaperRecord:
        try:
            return self._records[paper_id]
        except KeyError:
            raise NotFoundError(f"no paper with id {paper_id!r}") from None

    def _field_tokens(self, record: PaperRecord) -> dict[str, Counter]:
        cached = self._search_cache.get(record.id)
        if cached is None:
            cached = {
                "title": Counter(tokenize(record.title)),
                "abstract": Counter(tokenize(record.abstract)),
                "keywords": Counter(t for kw in record.keywords for t in tokenize(kw)),
                "authors": Counter(t for a in record.authors for t in tokenize(a)),
            }
            self._search_cache[record.id] = cached
        return cached

    def keyword_search(
        self,
        query: str,
        fields: Sequence[str] = SEARCHABLE_FIELDS,
        limit: int | None = None,
    ) -> list[PaperRecord]:
        """Case-insensitive conjunctive token match over the selected fields.

        Results are ordered by (total match count desc, year desc, id asc);
        records lacking a year sort after all dated ones. An empty query
        matches nothing.
        """
        if limit is not None and limit < 1:
            raise ValidationError("limit must be >= 1")
        unknown = set(fields) - set(SEARCHABLE_FIELDS)
        if unknown:
            raise ValidationError(f"unknown search fields: {sorted(unknown)}")
        terms = tokenize(query)
        if not terms:
            return []
        scored: list[tuple[int, PaperRecord]] = []
        for record in self._records.values():
            counts = self._field_tokens(record)
            total = 0
            matched_all = True
            for term in terms:
                occurrences = sum(counts[f][term] for f in fields)
                if occurrences == 0:
                    matched_all = False
                    break
                total += occurrences
            if matched_all:
                scored.append((total, record))
        scored.sort(
            key=lambda item: (
                -item[0],
                -(item[1].year if item[1].year is not None else -(10**6)),
                item[1].id,
            )
        )
        results = [record for _, record in scored]
        return results[:limit] if limit is not None else results

    def aggregate_meta(
        self,
        query: str | None = None,
        fields: Sequence[str] = SEARCHABLE_FIELDS,
        top_keywords: int = 20,
    ) -> CorpusStats:
        """Counts over the filtered subset (whole corpus when query is None).

        Records lacking a year are excluded from by_year; empty venues are
        excluded from by_venue. Keywords are counted lowercase.
        """
        if query is None:
            subset = list(self._records.values())
        else:
            subset = self.keyword_search(query, fields=fields, limit=None)
        by_year: Counter = Counter(r.year for r in subset if r.year is not None)
        by_venue: Counter = Counter(r.venue for r in subset if r.venue)
        keyword_counts: Counter = Counter(
            kw.strip().lower() for r in subset for kw in r.keywords if kw.strip()
        )
        top = sorted(keyword_counts.items(), key=lambda kv: (-kv[1], kv[0]))[:top_keywords]
        return CorpusStats(
            paper_count=len(subset),
            by_year=dict(sorted(by_year.items())),
            by_venue=dict(sorted(by_venue.items())),
            top_keywords=top,
        )


def write_corpus(records: Iterable[PaperRecord], path: str | Path) -> int:
    """Write records to a corpus file. Returns the number written."""
    count = 0
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict(), ensure_ascii=False) + "\n")
            count += 1
    return count
