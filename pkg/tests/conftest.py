import numpy as np
import pytest

from lubsim.ffnet import Architecture, init


@pytest.fixture
def small_arch():
    return Architecture(sigmas=(1.0, 3.0), n_freqs=3, hidden_layers=2, neurons=6)


@pytest.fixture
def small_params(small_arch):
    p = init(small_arch, 7)
    rng = np.random.default_rng(11)
    # non-zero biases so every gradient path is exercised
    for k, v in p.arrays.items():
        if k.endswith("_b"):
            p.arrays[k] = rng.normal(0, 0.3, np.shape(v))
    return p


def rel_err(a, b, floor=1e-12):
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), floor))


# One line per acceptance criterion, printed after the test run.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
