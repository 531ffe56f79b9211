from __future__ import annotations

import pytest

from paperscope.corpus import CorpusStore
from paperscope.sample import sample_records
from paperscope.workspace import Workspace, WorkspaceConfig

SAMPLE_N = 200
SAMPLE_SEED = 7

_acceptance_results: list[tuple[str, bool]] = []


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when == "call":
        marker = item.get_closest_marker("acceptance")
        if marker is not None:
            _acceptance_results.append((marker.args[0], report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _acceptance_results:
        return
    terminalreporter.section("acceptance criteria")
    for name, passed in _acceptance_results:
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  {name}")


@pytest.fixture(scope="session")
def sample_data_dir(tmp_path_factory) -> str:
    from paperscope.sample import write_sample

    out = tmp_path_factory.mktemp("sample-data")
    write_sample(out, SAMPLE_N, SAMPLE_SEED)
    return str(out)


@pytest.fixture(scope="session")
def sample_corpus(sample_data_dir) -> CorpusStore:
    from pathlib import Path

    store, report = CorpusStore.empty().ingest(Path(sample_data_dir) / "corpus.jsonl")
    assert not report.rejected
    return store


@pytest.fixture(scope="session")
def sample_records_list():
    return sample_records(SAMPLE_N, SAMPLE_SEED)


def make_workspace(sample_data_dir: str, llm=None, **config_changes) -> Workspace:
    from pathlib import Path

    base = Path(sample_data_dir)
    config = WorkspaceConfig(
        corpus_path=base / "corpus.jsonl",
        embedding_files={"mock": base / "embeddings-mock.jsonl"},
    )
    if config_changes:
        config = config.with_overrides(**config_changes)
    return Workspace(config, llm=llm)


@pytest.fixture()
def workspace(sample_data_dir) -> Workspace:
    return make_workspace(sample_data_dir)
