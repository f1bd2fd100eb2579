import numpy as np
import pytest

from sicta.policy import biased, fair
from sicta.tree import generate


def tree_stream(seed, count, d_values=(2, 3, 4, 5), n_range=(2, 50), policies=("fair", "biased")):
    """Reproducible mix of random trees cycling through d and policy."""
    makers = {"fair": fair, "biased": biased}
    combos = [(d, p) for d in d_values for p in policies]
    for k in range(count):
        rng = np.random.default_rng([seed, k])
        d, name = combos[k % len(combos)]
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        yield generate(n, makers[name](d), rng)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
