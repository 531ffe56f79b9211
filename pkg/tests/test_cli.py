from __future__ import annotations

import json
import subprocess
import sys
from pathlib import Path

import pytest

from paperscope.cli import run


def _json_out(capsys) -> dict:
    out = capsys.readouterr().out.strip().splitlines()
    return json.loads(out[-1])


def _make_sample(tmp_path: Path, n: int = 30, seed: int = 5) -> Path:
    data = tmp_path / "data"
    assert run(["sample", "--data-dir", str(data), "--n", str(n), "--seed", str(seed)]) == 0
    return data


def test_sample_is_deterministic_across_runs(tmp_path, capsys):
    a = _make_sample(tmp_path / "a")
    b = _make_sample(tmp_path / "b")
    assert (a / "corpus.jsonl").read_bytes() == (b / "corpus.jsonl").read_bytes()
    assert (a / "embeddings-mock.jsonl").read_bytes() == (b / "embeddings-mock.jsonl").read_bytes()
    different = _make_sample(tmp_path / "c", seed=6)
    assert (a / "corpus.jsonl").read_bytes() != (different / "corpus.jsonl").read_bytes()


def test_sample_json_payload(tmp_path, capsys):
    data = tmp_path / "data"
    assert run(["sample", "--data-dir", str(data), "--n", "12", "--seed", "1", "--json"]) == 0
    payload = _json_out(capsys)
    assert payload["papers"] == 12
    assert Path(payload["corpus"]).exists()
    assert Path(payload["embeddings"]).exists()
    assert payload["space"] == "mock"


def test_ingest_reports_rejects_and_merges(tmp_path, capsys):
    raw_a = tmp_path / "a.jsonl"
    raw_a.write_text(
        json.dumps({"id": "x1", "title": "First Paper"})
        + "\n"
        + "not valid json\n"
        + json.dumps({"title": ""})
        + "\n",
        "utf-8",
    )
    raw_b = tmp_path / "b.jsonl"
    raw_b.write_text(json.dumps({"id": "x2", "title": "Second Paper"}) + "\n", "utf-8")
    out = tmp_path / "merged.jsonl"
    code = run(
        [
            "ingest",
            "--input", str(raw_a),
            "--input", str(raw_b),
            "--output", str(out),
            "--json",
        ]
    )
    assert code == 0
    payload = _json_out(capsys)
    assert payload["papers"] == 2
    assert payload["accepted"] == 2
    reasons = {(r["file"], r["line"]) for r in payload["rejected"]}
    assert reasons == {(str(raw_a), 2), (str(raw_a), 3)}
    lines = out.read_text("utf-8").strip().splitlines()
    assert {json.loads(line)["id"] for line in lines} == {"x1", "x2"}


def test_ingest_missing_input_is_user_error(tmp_path, capsys):
    code = run(["ingest", "--input", str(tmp_path / "absent.jsonl"), "--json"])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_embed_mock_writes_vectors(tmp_path, capsys):
    data = _make_sample(tmp_path, n=10)
    out = data / "embeddings-alt.jsonl"
    code = run(
        [
            "embed",
            "--data-dir", str(data),
            "--space", "alt",
            "--dimension", "16",
            "--output", str(out),
            "--json",
        ]
    )
    assert code == 0
    payload = _json_out(capsys)
    assert payload == {"space": "alt", "papers": 10, "output": str(out)}
    rows = [json.loads(line) for line in out.read_text("utf-8").strip().splitlines()]
    assert len(rows) == 10
    assert all(len(row["vector"]) == 16 for row in rows)


def test_embed_remote_requires_model(tmp_path, capsys):
    data = _make_sample(tmp_path, n=5)
    code = run(["embed", "--data-dir", str(data), "--base-url", "http://example.invalid"])
    assert code == 1
    assert "error:" in capsys.readouterr().err


def test_index_build_then_search_matches_exact(tmp_path, capsys):
    data = _make_sample(tmp_path, n=40)
    assert run(["index", "--data-dir", str(data), "--json"]) == 0
    payload = _json_out(capsys)
    assert payload["papers"] == 40
    assert (data / "index-mock.json").exists()
    assert payload["seconds"] >= 0

    base = ["search", "--data-dir", str(data), "--seed-id", "p1", "--k", "10", "--json"]
    assert run(base) == 0
    ann_hits = _json_out(capsys)["hits"]
    assert run(base + ["--exact"]) == 0
    exact_hits = _json_out(capsys)["hits"]
    assert len(ann_hits) == 10
    assert ann_hits == exact_hits
    assert "p1" not in {hit["paper_id"] for hit in ann_hits}
    assert all(hit["title"] for hit in ann_hits)


def test_search_text_and_threshold(tmp_path, capsys):
    data = _make_sample(tmp_path, n=25)
    code = run(
        ["search", "--data-dir", str(data), "--text", "graph learning", "--k", "5", "--json"]
    )
    assert code == 0
    hits = _json_out(capsys)["hits"]
    assert len(hits) == 5
    assert hits[1]["score"] != hits[2]["score"]
    floor = (hits[1]["score"] + hits[2]["score"]) / 2
    code = run(
        [
            "search",
            "--data-dir", str(data),
            "--text", "graph learning",
            "--k", "5",
            "--threshold", str(floor),
            "--json",
        ]
    )
    assert code == 0
    filtered = _json_out(capsys)["hits"]
    assert [h["paper_id"] for h in filtered] == [h["paper_id"] for h in hits[:2]]


def test_search_requires_seed_or_text(tmp_path, capsys):
    data = _make_sample(tmp_path, n=5)
    assert run(["search", "--data-dir", str(data)]) == 1
    assert "error:" in capsys.readouterr().err


def test_search_missing_corpus_is_user_error(tmp_path, capsys):
    assert run(["search", "--data-dir", str(tmp_path / "void"), "--text", "x"]) == 1
    assert "error:" in capsys.readouterr().err


def test_chat_one_shot_grounded(tmp_path, capsys):
    data = _make_sample(tmp_path, n=30)
    code = run(
        ["chat", "--data-dir", str(data), "--message", "what work covers graphs?", "--json"]
    )
    assert code == 0
    payload = _json_out(capsys)
    assert payload["reply"]
    assert payload["grounded_count"] >= 1
    assert 1 <= len(payload["context_paper_ids"]) <= 8
    assert "[[cite:" in payload["reply"]


def test_help_and_bad_verb_exit_codes(capsys):
    assert run(["--help"]) == 0
    capsys.readouterr()
    assert run(["not-a-verb"]) == 1


def test_unexpected_failure_returns_internal_code(tmp_path, capsys, monkeypatch):
    data = _make_sample(tmp_path, n=5)
    import paperscope.cli as cli_module

    def boom(config, llm=None):
        raise RuntimeError("wires crossed")

    monkeypatch.setattr(cli_module, "Workspace", boom)
    assert run(["search", "--data-dir", str(data), "--text", "x"]) == 2
    assert "RuntimeError" in capsys.readouterr().err


def test_console_script_entry_point(tmp_path):
    result = subprocess.run(
        [sys.executable, "-c", "import paperscope.cli as c, sys; sys.exit(c.run(sys.argv[1:]))",
         "sample", "--data-dir", str(tmp_path / "d"), "--n", "3", "--json"],
        capture_output=True,
        text=True,
        timeout=60,
    )
    assert result.returncode == 0
    assert json.loads(result.stdout.strip().splitlines()[-1])["papers"] == 3
