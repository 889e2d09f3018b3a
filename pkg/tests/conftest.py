import json
from pathlib import Path

import pytest

from spacecurve.polycore import parse_system

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "spacecurve" / "fixtures"
FROZEN = json.loads((Path(__file__).with_name("frozen.json")).read_text())


def load(name):
    return parse_system((FIXTURES / f"{name}.pol").read_text())


@pytest.fixture
def frozen():
    return FROZEN


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[k])
