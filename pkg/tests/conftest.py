import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

settings.register_profile("default", max_examples=200, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# values on a coarse grid keep ties likely, which exercises the strict
# indicator conventions
coord = st.integers(-40, 40).map(lambda k: k / 8.0)
finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False, width=64)


def samples(min_n=3, max_n=12, dim=2, elements=finite):
    return st.integers(min_n, max_n).flatmap(
        lambda n: arrays(np.float64, (n, dim), elements=elements))


def positive_samples(min_n=3, max_n=12):
    return st.integers(min_n, max_n).flatmap(
        lambda n: arrays(np.float64, (n,), elements=st.floats(0.01, 100.0, width=64)))


def seeds():
    return st.integers(0, 2**32 - 1)
