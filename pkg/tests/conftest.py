from __future__ import annotations

from pathlib import Path

import pytest

from icsimp import parse_schema, parse_update

DATA = Path(__file__).parent / "data"

# acceptance lines collected by test_acceptance.py, printed at the end
ACCEPTANCE: dict = {}


def load(name: str):
    s = parse_schema((DATA / f"{name}.sch").read_text())
    upd = DATA / f"{name}.upd"
    u = parse_update(upd.read_text(), s) if upd.exists() else None
    return s, u


@pytest.fixture
def data_dir() -> Path:
    return DATA


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
