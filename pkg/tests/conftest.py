import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ledgerlab import hashchain  # noqa: E402
from ledgerlab.hashchain import Kind, Record, TruthLabel  # noqa: E402


@pytest.fixture(scope="session")
def vectors():
    return json.loads((Path(__file__).parent / "vectors.json").read_text())


def make_record(rid: str, payload: bytes = b"payload", label=TruthLabel.UNKNOWN, kind=Kind.TRANSACTION):
    return Record(rid, kind, payload, label)


def build_chain(n_blocks: int, per_block: int = 2, prefix: str = "b") -> hashchain.Chain:
    chain = hashchain.genesis([make_record(f"{prefix}0-0", b"genesis")], timestamp=0)
    for i in range(1, n_blocks):
        recs = [make_record(f"{prefix}{i}-{j}", f"block {i} record {j}".encode()) for j in range(per_block)]
        chain = hashchain.append(chain, recs, timestamp=i)
    return chain


@pytest.fixture
def five_block_chain():
    return build_chain(5)


ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def criterion(request):
    """Record a one-line PASS/FAIL verdict for an acceptance criterion."""
    state = {"label": request.node.name}

    def label(text: str):
        state["label"] = text

    yield label
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {state['label']}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
