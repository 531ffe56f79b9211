"""Saved-paper sets: the user's working collection, with JSON and BibTeX export."""
from __future__ import annotations

import json
import logging
import re
import threading
import time
import uuid
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

from .corpus import CorpusStore, PaperRecord, tokenize
from .errors import NotFoundError, ValidationError

logger = logging.getLogger(__name__)

SAVED_FORMAT_VERSION = 1

# Leading title words skipped when forming a BibTeX key.
_KEY_STOPWORDS = frozenset(
    "a an the on in of for to and or with at by from as into over under".split()
)

_SPECIAL_CHARS = re.compile(r"([&%$#_])")


@dataclass
class SavedPaperSet:
    """Ordered, duplicate-free list of paper ids."""

    set_id: str
    paper_ids: list[str] = field(default_factory=list)
    created: float = 0.0
    modified: float = 0.0

    def to_dict(self) -> dict:
        return {
            "set_id": self.set_id,
            "paper_ids": list(self.paper_ids),
            "created": self.created,
            "modified": self.modified,
        }


class SavedPaperStore:
    """Saved sets keyed by set_id; mutations per-set serialized and persisted.

    Membership in the corpus is checked at save time only, so sets loaded
    from disk may reference ids absent from a later corpus.
    """

    def __init__(
        self,
        persist_path: Path | None = None,
        clock: Callable[[], float] = time.time,
    ):
        self._sets: dict[str, SavedPaperSet] = {}
        self._locks: dict[str, threading.Lock] = {}
        self._registry_lock = threading.Lock()
        self._persist_path = Path(persist_path) if persist_path else None
        self._clock = clock
        if self._persist_path and self._persist_path.exists():
            self._load()

    def _load(self) -> None:
        data = json.loads(self._persist_path.read_text("utf-8"))
        for set_id, row in data.get("sets", {}).items():
            self._sets[set_id] = SavedPaperSet(
                set_id=set_id,
                paper_ids=list(dict.fromkeys(row.get("paper_ids", []))),
                created=float(row.get("created", 0.0)),
                modified=float(row.get("modified", 0.0)),
            )
            self._locks[set_id] = threading.Lock()

    def _persist(self) -> None:
        if self._persist_path is None:
            return
        doc = {
            "format_version": SAVED_FORMAT_VERSION,
            "sets": {sid: s.to_dict() for sid, s in sorted(self._sets.items())},
        }
        self._persist_path.parent.mkdir(parents=True, exist_ok=True)
        tmp = self._persist_path.with_suffix(".tmp")
        tmp.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n", "utf-8")
        tmp.replace(self._persist_path)

    def create(self, set_id: str | None = None) -> SavedPaperSet:
        with self._registry_lock:
            if set_id is not None and set_id in self._sets:
                raise ValidationError(f"saved set {set_id!r} already exists")
            if set_id is None:
                set_id = uuid.uuid4().hex
            now = self._clock()
            saved = SavedPaperSet(set_id=set_id, created=now, modified=now)
            self._sets[set_id] = saved
            self._locks[set_id] = threading.Lock()
            self._persist()
        return saved

    def get(self, set_id: str) -> SavedPaperSet:
        with self._registry_lock:
            saved = self._sets.get(set_id)
        if saved is None:
            raise NotFoundError(f"no saved set with id {set_id!r}")
        return saved

    def list_sets(self) -> list[SavedPaperSet]:
        with self._registry_lock:
            return sorted(self._sets.values(), key=lambda s: (s.created, s.set_id))

    def _lock_for(self, set_id: str) -> threading.Lock:
        with self._registry_lock:
            lock = self._locks.get(set_id)
        if lock is None:
            raise NotFoundError(f"no saved set with id {set_id!r}")
        return lock

    def save_paper(self, set_id: str, paper_id: str, corpus: CorpusStore) -> SavedPaperSet:
        """Append the paper if absent; saving an already-saved id is a no-op."""
        corpus.get_paper(paper_id)
        lock = self._lock_for(set_id)
        with lock:
            saved = self.get(set_id)
            if paper_id not in saved.paper_ids:
                saved.paper_ids.append(paper_id)
                saved.modified = self._clock()
                self._persist()
        return saved

    def remove_paper(self, set_id: str, paper_id: str) -> SavedPaperSet:
        lock = self._lock_for(set_id)
        with lock:
            saved = self.get(set_id)
            if paper_id in saved.paper_ids:
                saved.paper_ids.remove(paper_id)
                saved.modified = self._clock()
                self._persist()
        return saved

    def records_for(self, set_id: str, corpus: CorpusStore) -> list[PaperRecord]:
        """Saved records in insertion order; ids gone from the corpus are
        skipped with a warning rather than failing the whole set."""
        saved = self.get(set_id)
        records = []
        for paper_id in saved.paper_ids:
            if paper_id in corpus:
                records.append(corpus.get_paper(paper_id))
            else:
                logger.warning("saved paper %r is not in the current corpus", paper_id)
        return records


def export_json(saved: SavedPaperSet, corpus: CorpusStore) -> list[dict]:
    """Full records in set order, as corpus-file-format objects."""
    out = []
    for paper_id in saved.paper_ids:
        if paper_id in corpus:
            out.append(corpus.get_paper(paper_id).to_dict())
    return out


def _author_surname(record: PaperRecord) -> str:
    if not record.authors:
        return "anon"
    parts = record.authors[0].split()
    if not parts:
        return "anon"
    surname = re.sub(r"[^a-z0-9]", "", parts[-1].lower())
    return surname or "anon"


def _title_token(record: PaperRecord) -> str:
    for token in tokenize(record.title):
        if token not in _KEY_STOPWORDS:
            return token
    return "untitled"


def bibtex_key(record: PaperRecord) -> str:
    """Base (pre-disambiguation) key: first author surname + year + first
    non-stopword title word, all lowercase."""
    year = str(record.year) if record.year is not None else ""
    return f"{_author_surname(record)}{year}{_title_token(record)}"


def _suffix(index: int) -> str:
    letters = ""
    index += 1
    while index > 0:
        index, rem = divmod(index - 1, 26)
        letters = chr(ord("a") + rem) + letters
    return letters


def _escape_value(text: str) -> str:
    cleaned = text.replace("{", "").replace("}", "").replace("\\", "")
    return _SPECIAL_CHARS.sub(r"\\\1", cleaned)


def _protect_title(title: str) -> str:
    # Words with interior capitals (acronyms, camel case) keep their casing
    # under BibTeX by being wrapped in braces.
    words = []
    for word in _escape_value(title).split(" "):
        if re.search(r"[A-Z]", word[1:]):
            words.append("{" + word + "}")
        else:
            words.append(word)
    return " ".join(words)


def _entry_type(record: PaperRecord) -> str:
    venue = record.venue.lower()
    if any(marker in venue for marker in ("conference", "symposium", "proceedings")):
        return "inproceedings"
    return "article"


def _render_entry(record: PaperRecord, key: str) -> str:
    entry_type = _entry_type(record)
    fields: list[tuple[str, str]] = [("title", _protect_title(record.title))]
    if record.authors:
        fields.append(("author", _escape_value(" and ".join(record.authors))))
    if record.year is not None:
        fields.append(("year", str(record.year)))
    if record.venue:
        venue_field = "booktitle" if entry_type == "inproceedings" else "journal"
        fields.append((venue_field, _escape_value(record.venue)))
    if record.keywords:
        fields.append(("keywords", _escape_value(", ".join(record.keywords))))
    body = ",\n".join(f"  {name} = {{{value}}}" for name, value in fields)
    return f"@{entry_type}{{{key},\n{body}\n}}"


def bibtex_entries(records: Sequence[PaperRecord]) -> list[tuple[str, str]]:
    """(key, entry text) per record, in order, with unique keys.

    When several records share a base key, each gets a letter suffix in
    record order (a, b, ...); unshared keys stay bare.
    """
    base_keys = [bibtex_key(r) for r in records]
    occurrences: dict[str, int] = {}
    for key in base_keys:
        occurrences[key] = occurrences.get(key, 0) + 1
    seen: dict[str, int] = {}
    out = []
    for record, base in zip(records, base_keys):
        if occurrences[base] > 1:
            position = seen.get(base, 0)
            seen[base] = position + 1
            key = base + _suffix(position)
        else:
            key = base
        out.append((key, _render_entry(record, key)))
    return out


def export_bibtex(records: Sequence[PaperRecord]) -> str:
    entries = bibtex_entries(records)
    if not entries:
        return ""
    return "\n\n".join(text for _, text in entries) + "\n"


def saved_bibtex(saved: SavedPaperSet, corpus: CorpusStore) -> str:
    records = [corpus.get_paper(pid) for pid in saved.paper_ids if pid in corpus]
    return export_bibtex(records)
