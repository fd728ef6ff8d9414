import numpy as np
import pytest

from gradrecon import generate_test_signal

N = 128
TWO_TONE = [(3.0, 10), (1.0, 15)]


def dft_direct(x):
    """Textbook O(N^2) summation, independent of numpy.fft."""
    x = np.asarray(x, dtype=float)
    n = x.size
    out = np.zeros(n, dtype=complex)
    for k in range(n):
        for m in range(n):
            out[k] += x[m] * np.exp(-2j * np.pi * k * m / n)
    return out


def measure_direct(x, p=1.0):
    return float(np.mean(np.abs(dft_direct(x)) ** (1.0 / p)))


@pytest.fixture(scope="session")
def two_tone():
    return generate_test_signal(N, TWO_TONE)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
