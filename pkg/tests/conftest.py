import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")

ACCEPTANCE_LINES: list[str] = []


def coords(dim: int):
    return st.floats(-10, 10, allow_nan=False, allow_infinity=False).map(lambda x: round(x, 6))


def curves(min_size=1, max_size=8, dim=None):
    """Hypothesis strategy for vertex arrays of a fixed random dimension."""
    dims = st.just(dim) if dim else st.integers(1, 3)
    return dims.flatmap(
        lambda d: st.lists(st.lists(coords(d), min_size=d, max_size=d), min_size=min_size, max_size=max_size)
    ).map(lambda v: np.array(v, dtype=float))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
