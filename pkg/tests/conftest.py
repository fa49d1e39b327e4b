import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# A concrete 21-key list matching the toy figure: starts at 1 and 3, ends at 77;
# at epsilon 4 it splits into [0,5], [6,9], [10,20] with residuals 1, 0, ..., 3.
TOY_KEYS = [1, 3, 4, 7, 9, 20, 32, 33, 34, 40, 55, 57, 58, 59, 60, 61, 63, 66, 69, 73, 77]

GAP_KINDS = ("uniform", "small", "geometric", "heavy", "clustered", "linear", "noisy_linear")


def make_keys(rng, n, kind="uniform", base=0):
    """Strictly increasing uint64 keys with a chosen gap distribution."""
    if kind == "uniform":
        gaps = rng.integers(1, 100, n)
    elif kind == "small":
        gaps = rng.integers(1, 4, n)
    elif kind == "geometric":
        gaps = rng.geometric(0.02, n)
    elif kind == "heavy":
        gaps = np.minimum(rng.pareto(1.2, n) * 10 + 1, 1e6).astype(np.int64)
    elif kind == "clustered":
        gaps = np.where(rng.random(n) < 0.05, rng.integers(1000, 100000, n), rng.integers(1, 5, n))
    elif kind == "linear":
        gaps = np.full(n, int(rng.integers(1, 50)))
    elif kind == "noisy_linear":
        gaps = 20 + rng.integers(-2, 3, n)
    else:
        raise ValueError(kind)
    keys = base + np.cumsum(gaps.astype(np.uint64))
    return keys.astype(np.uint64)


@st.composite
def key_lists(draw, min_size=1, max_size=300, max_gap=1000, max_base=2 ** 40):
    n = draw(st.integers(min_size, max_size))
    gaps = draw(st.lists(st.integers(1, max_gap), min_size=n, max_size=n))
    base = draw(st.integers(0, max_base))
    return (base + np.cumsum(np.array(gaps, dtype=np.uint64))).astype(np.uint64)


@pytest.fixture
def toy():
    return np.array(TOY_KEYS, dtype=np.uint64)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


ACCEPTANCE = pytest.StashKey()


def pytest_configure(config):
    config.stash[ACCEPTANCE] = {}
    config.addinivalue_line("markers", "criterion(number): acceptance criterion checked by the test")


@pytest.fixture
def verdict(request):
    """Record one acceptance line, then assert it.

    The line starts out as a failure so a test that errors early still shows up.
    """
    number = request.node.get_closest_marker("criterion").args[0]
    lines = request.config.stash[ACCEPTANCE]
    lines[number] = f"FAIL  criterion {number:>2}  did not complete"

    def check(title, ok, detail=""):
        lines[number] = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}  {title}: {detail}"
        assert ok, detail

    return check


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for number in sorted(lines):
            terminalreporter.write_line(lines[number])
