import numpy as np
import pytest

from qcfield import PotentialSpec, WaveConfig


def random_config(rng, d=None, N=None, k=None, gamma=True):
    d = d if d is not None else int(rng.integers(1, 4))
    N = N if N is not None else int(rng.integers(max(d, 2), 7))
    k = k if k is not None else float(rng.uniform(0.5, 2.0))
    while True:
        K = rng.normal(size=(d, N))
        K = k * K / np.linalg.norm(K, axis=0)
        s = np.linalg.svd(K, compute_uv=False)
        if s[-1] > 0.1 * k:
            break
    g = rng.uniform(-np.pi, np.pi, N) if gamma else None
    return WaveConfig(K, g)


def random_hermitian_spec(rng, d):
    B = rng.normal(size=(d + 1, d + 1)) + 1j * rng.normal(size=(d + 1, d + 1))
    return PotentialSpec.general((B + B.conj().T) / 2)


def random_controls(rng, N):
    return rng.normal(size=2 * N) + 1j * rng.normal(size=2 * N)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
