import json
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parents[1]
FIXTURES = ROOT / "fixtures"
GOLDEN = Path(__file__).resolve().parent / "golden"

# Acceptance outcomes keyed by criterion number, filled in by test_acceptance.py.
ACCEPTANCE: dict = {}


@pytest.fixture
def rng():
    return np.random.default_rng(20261017)


def load_fixture(name: str) -> dict:
    return json.loads((FIXTURES / name).read_text())


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        title, ok = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d} {'PASS' if ok else 'FAIL'}: {title}")
