from pathlib import Path

import pytest

from elgot.core import Signature

ROOT = Path(__file__).resolve().parent.parent
DEMO_DATA = ROOT / "demos" / "data"
MALFORMED = Path(__file__).resolve().parent / "data" / "malformed"

MUL = Signature({"mul": 2})

DIAMOND = ["bot", "a", "b", "top"]


def diamond_joins():
    sets = {"bot": set(), "a": {0}, "b": {1}, "top": {0, 1}}
    name = {frozenset(v): k for k, v in sets.items()}
    return {(p, q): name[frozenset(sets[p] | sets[q])] for p in DIAMOND for q in DIAMOND}


@pytest.fixture
def demo_data():
    return DEMO_DATA


CRITERIA: list[str] = []


def record_criterion(number: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {number:2d} {'PASS' if ok else 'FAIL'}  {title}" + (f"  [{detail}]" if detail else "")
    CRITERIA.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in sorted(CRITERIA):
            terminalreporter.write_line(line)
