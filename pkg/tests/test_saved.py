from __future__ import annotations

import itertools
import json

import pytest

from paperscope.corpus import CorpusStore, PaperRecord
from paperscope.errors import NotFoundError, ValidationError
from paperscope.saved import (
    SavedPaperStore,
    bibtex_entries,
    bibtex_key,
    export_bibtex,
    export_json,
    saved_bibtex,
)

from oracles import parse_bibtex


def _corpus() -> CorpusStore:
    lines = [
        json.dumps(
            {
                "id": "n1",
                "title": "Notes on the Analytical Engine",
                "authors": ["Ada Lovelace"],
                "year": 1943,
                "venue": "Scientific Memoirs",
            }
        ),
        json.dumps(
            {
                "id": "n2",
                "title": "Sketches of Early Computing",
                "authors": ["Charles Babbage", "Ada Lovelace"],
                "year": 1964,
                "venue": "Proceedings of the Royal Society",
                "keywords": ["computing", "history"],
            }
        ),
        json.dumps({"id": "n3", "title": "An Anonymous Pamphlet"}),
    ]
    store, report = CorpusStore.empty().ingest(lines)
    assert not report.rejected
    return store


def _clock():
    counter = itertools.count(start=100)
    return lambda: float(next(counter))


def test_create_get_list_sets():
    store = SavedPaperStore(clock=_clock())
    a = store.create("alpha")
    b = store.create()
    assert a.set_id == "alpha" and a.created == 100.0
    assert store.get("alpha") is a
    assert [s.set_id for s in store.list_sets()] == ["alpha", b.set_id]
    with pytest.raises(ValidationError):
        store.create("alpha")
    with pytest.raises(NotFoundError):
        store.get("missing")


def test_save_paper_appends_once_and_touches_modified():
    corpus = _corpus()
    store = SavedPaperStore(clock=_clock())
    saved = store.create("s")
    store.save_paper("s", "n2", corpus)
    store.save_paper("s", "n1", corpus)
    store.save_paper("s", "n2", corpus)  # idempotent
    assert saved.paper_ids == ["n2", "n1"]
    modified_after_saves = saved.modified
    assert modified_after_saves > saved.created
    store.save_paper("s", "n1", corpus)
    assert saved.modified == modified_after_saves  # no-op save does not touch


def test_save_paper_requires_corpus_membership():
    store = SavedPaperStore()
    store.create("s")
    with pytest.raises(NotFoundError):
        store.save_paper("s", "ghost", _corpus())
    with pytest.raises(NotFoundError):
        store.save_paper("missing-set", "n1", _corpus())
    assert store.get("s").paper_ids == []


def test_remove_paper():
    corpus = _corpus()
    store = SavedPaperStore(clock=_clock())
    store.create("s")
    store.save_paper("s", "n1", corpus)
    store.save_paper("s", "n2", corpus)
    store.remove_paper("s", "n1")
    assert store.get("s").paper_ids == ["n2"]
    store.remove_paper("s", "n1")  # absent id is a no-op
    assert store.get("s").paper_ids == ["n2"]


def test_records_for_skips_ids_missing_from_corpus(caplog):
    corpus = _corpus()
    store = SavedPaperStore()
    saved = store.create("s")
    store.save_paper("s", "n1", corpus)
    store.save_paper("s", "n3", corpus)
    saved.paper_ids.insert(1, "gone")  # simulate a stale persisted id
    with caplog.at_level("WARNING"):
        records = store.records_for("s", corpus)
    assert [r.id for r in records] == ["n1", "n3"]
    assert any("gone" in message for message in caplog.messages)


def test_persistence_round_trip(tmp_path):
    corpus = _corpus()
    path = tmp_path / "saved.json"
    store = SavedPaperStore(persist_path=path, clock=_clock())
    store.create("keeper")
    store.save_paper("keeper", "n2", corpus)
    store.save_paper("keeper", "n1", corpus)

    reloaded = SavedPaperStore(persist_path=path)
    saved = reloaded.get("keeper")
    assert saved.paper_ids == ["n2", "n1"]
    assert saved.created == 100.0
    doc = json.loads(path.read_text("utf-8"))
    assert doc["format_version"] == 1


def test_export_json_matches_corpus_records():
    corpus = _corpus()
    store = SavedPaperStore()
    saved = store.create("s")
    store.save_paper("s", "n2", corpus)
    store.save_paper("s", "n1", corpus)
    rows = export_json(saved, corpus)
    assert [row["id"] for row in rows] == ["n2", "n1"]
    assert rows[1]["title"] == "Notes on the Analytical Engine"
    assert "abstract" not in rows[1]  # absent fields are omitted, not blanked


def test_bibtex_key_shape():
    corpus = _corpus()
    assert bibtex_key(corpus.get_paper("n1")) == "lovelace1943notes"
    assert bibtex_key(corpus.get_paper("n2")) == "babbage1964sketches"
    assert bibtex_key(corpus.get_paper("n3")) == "anonanonymous"
    no_usable_title = PaperRecord(id="x", title="Of The And", authors=("A B",), year=2000)
    assert bibtex_key(no_usable_title) == "b2000untitled"


def test_bibtex_entry_types_follow_venue():
    corpus = _corpus()
    entries = dict(bibtex_entries([corpus.get_paper("n1"), corpus.get_paper("n2")]))
    assert entries["lovelace1943notes"].startswith("@article{lovelace1943notes,")
    assert "journal = {Scientific Memoirs}" in entries["lovelace1943notes"]
    assert entries["babbage1964sketches"].startswith("@inproceedings{babbage1964sketches,")
    assert "booktitle = {Proceedings of the Royal Society}" in entries["babbage1964sketches"]


def test_bibtex_collision_suffixes_cover_whole_group():
    records = [
        PaperRecord(id="a", title="Shared Topic", authors=("X Smith",), year=2020),
        PaperRecord(id="b", title="Shared Topic Again", authors=("Y Smith",), year=2020),
        PaperRecord(id="c", title="Different Things", authors=("Z Jones",), year=2020),
    ]
    keys = [key for key, _ in bibtex_entries(records)]
    assert keys[0] == "smith2020shareda"
    assert keys[1] == "smith2020sharedb"
    assert keys[2] == "jones2020different"


def test_bibtex_suffixes_grow_past_z():
    records = [
        PaperRecord(id=f"p{i}", title="Same Title", authors=("Q Same",), year=2001)
        for i in range(28)
    ]
    keys = [key for key, _ in bibtex_entries(records)]
    assert keys[0].endswith("a")
    assert keys[25].endswith("z")
    assert keys[26].endswith("aa")
    assert keys[27].endswith("ab")
    assert len(set(keys)) == 28


def test_bibtex_escapes_special_characters():
    record = PaperRecord(
        id="x",
        title="Cost & Benefit: 100% of #1 Systems_Design {braced}",
        authors=("D. O'Neil",),
        year=2019,
        venue="Journal of A & B",
    )
    [(key, text)] = bibtex_entries([record])
    assert "\\&" in text and "\\%" in text and "\\#" in text and "\\_" in text
    assert "{braced}" not in text
    assert "journal = {Journal of A \\& B}" in text


def test_bibtex_braces_interior_capitals():
    record = PaperRecord(id="x", title="The TensorFlow System for ML Workloads", year=2016)
    [(_, text)] = bibtex_entries([record])
    assert "{TensorFlow}" in text
    assert "{ML}" in text
    assert "The {TensorFlow} System for {ML} Workloads" in text


def test_export_bibtex_parses_with_independent_reader():
    corpus = _corpus()
    records = [corpus.get_paper(pid) for pid in ("n1", "n2", "n3")]
    text = export_bibtex(records)
    assert text.endswith("\n") and "\n\n" in text
    parsed = parse_bibtex(text)
    assert [entry["key"] for entry in parsed] == [
        "lovelace1943notes",
        "babbage1964sketches",
        "anonanonymous",
    ]
    assert parsed[0]["type"] == "article"
    assert parsed[1]["type"] == "inproceedings"
    assert parsed[0]["fields"]["author"] == "Ada Lovelace"
    assert parsed[1]["fields"]["keywords"] == "computing, history"
    assert export_bibtex([]) == ""


def test_saved_bibtex_uses_set_order_and_skips_stale_ids():
    corpus = _corpus()
    store = SavedPaperStore()
    saved = store.create("s")
    store.save_paper("s", "n2", corpus)
    store.save_paper("s", "n1", corpus)
    saved.paper_ids.append("gone")
    parsed = parse_bibtex(saved_bibtex(saved, corpus))
    assert [entry["key"] for entry in parsed] == ["babbage1964sketches", "lovelace1943notes"]
