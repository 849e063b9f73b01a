from __future__ import annotations

import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

from hypertrees import Complex  # noqa: E402
from oracles import RP2  # noqa: E402


@pytest.fixture
def k4_graph() -> Complex:
    return Complex.complete(4, 1)


@pytest.fixture
def tetra_boundary() -> Complex:
    return Complex.complete(4, 2)


@pytest.fixture
def rp2() -> Complex:
    return Complex(6, 2, RP2)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
