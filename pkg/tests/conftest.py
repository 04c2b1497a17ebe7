import numpy as np
import pytest

CAT = np.array([[2.0, 1.0], [1.0, 1.0]])
DIAG2 = np.diag([2.0, 0.5])
DIAG12 = np.diag([1.2, 1 / 1.2])
CPLX = np.array([[2 * np.exp(0.3j), 0.3], [0, 0.5 * np.exp(-0.5j)]])
# dominated by the cat map: base ratio 1.44 < 2.618
CPLX_DOM = np.array([[1.2 * np.exp(0.3j), 0.1], [0, np.exp(-0.5j) / 1.2]])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def unit_rows(rng, n, k):
    x = rng.standard_normal((n, k))
    return x / np.linalg.norm(x, axis=1, keepdims=True)


def tangent_rows(rng, s):
    v = rng.standard_normal(s.shape)
    return v - np.sum(v * s, axis=1, keepdims=True) * s


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(test_acceptance.RESULTS, key=lambda l: int(l.split("[")[1].split("]")[0])):
            terminalreporter.write_line(line)
