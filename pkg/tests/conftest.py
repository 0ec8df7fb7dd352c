import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from qaseda.circuits import Ansatz, n_codes

settings.register_profile("default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@st.composite
def ansatzes(draw, max_n=4, max_m=6, min_n=1):
    n = draw(st.integers(min_n, max_n))
    m = draw(st.integers(1, max_m))
    cells = draw(st.lists(st.integers(0, n_codes(n) - 1), min_size=n * m, max_size=n * m))
    return Ansatz(np.array(cells, dtype=np.int64).reshape(n, m))


def random_ansatz(rng, n, m):
    return Ansatz(rng.integers(0, n_codes(n), (n, m)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(results):
        terminalreporter.write_line(results[k])
