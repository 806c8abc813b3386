from __future__ import annotations

import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from qrlc.code import random_code, two_qubit_example  # noqa: E402
from qrlc.extraction import build_extraction  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def two_qubit():
    code = two_qubit_example()
    return code, build_extraction(code)


@pytest.fixture(scope="session")
def code4():
    code = random_code(4, 1, 11)
    return code, build_extraction(code)


@pytest.fixture(scope="session")
def small_codes():
    return [random_code(n, k, 100 + i) for i, (n, k) in enumerate([(2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (5, 1)])]


@pytest.fixture
def acceptance_line(request):
    """Record one PASS/FAIL line for the running acceptance test."""
    state = {"detail": ""}
    yield state
    rep = getattr(request.node, "rep_call", None)
    ok = rep is not None and rep.passed
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {state.get('name', request.node.name)}  {state['detail']}")


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
