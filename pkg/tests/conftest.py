from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from minimax_rules import build_cost_matrix

FIXTURES = Path(__file__).parent / "fixtures"

settings.register_profile(
    "default", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def example1():
    return build_cost_matrix("ABC", "xyz", [[4, 0, 5], [3, 5, 0], [3, 2, 0]])


@pytest.fixture
def example3():
    return build_cost_matrix("ABC", "xyz", [[4, 0, 2], [4, 6, 0], [0, 0, 5]])


def random_matrix(rng: np.random.Generator, m: int, n: int, lo: int = -5, hi: int = 10):
    rows = rng.integers(lo, hi, size=(m, n))
    return build_cost_matrix([f"s{i}" for i in range(m)], [f"d{j}" for j in range(n)], rows)


# PASS/FAIL lines from the acceptance suite, echoed after the run
ACCEPTANCE: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
