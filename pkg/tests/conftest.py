from __future__ import annotations

import pytest

from oracles import DATA
from strategist.evaluation import load_manifest
from strategist.llm import FixtureStore, Gateway
from strategist.pipeline import StrategyChain
from strategist.retrieval import index_corpus, load_corpus

FIXTURES = DATA / "fixtures" / "llm"


def replay_chain(**kwargs) -> StrategyChain:
    return StrategyChain(Gateway(mode="replay", store=FixtureStore(FIXTURES)), **kwargs)


@pytest.fixture
def chain() -> StrategyChain:
    return replay_chain()


@pytest.fixture(scope="session")
def records():
    return load_manifest(DATA / "manifest.jsonl")


@pytest.fixture(scope="session")
def docs():
    return load_corpus(DATA / "corpus.jsonl")


@pytest.fixture(scope="session")
def index(docs):
    return index_corpus(docs)


def pytest_runtest_logreport(report):
    # a criterion that errors before recording its verdict still gets a FAIL line
    name = report.nodeid.rpartition("::")[2]
    if "test_acceptance.py" not in report.nodeid or not report.failed or not name.startswith("test_"):
        return
    from test_acceptance import RESULTS

    number = int(name.split("_")[1])
    if number not in RESULTS:
        RESULTS[number] = (name[8:].replace("_", " "), False, f"error during {report.when}")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import summary_lines
    except ImportError:
        return
    lines = summary_lines()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
