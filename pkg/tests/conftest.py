import numpy as np
import pytest

from hpflow.models import PRESETS, preset

SIGMA_MINUS = np.array([[0, 1], [0, 0]], dtype=complex)
E0 = np.array([1, 0], dtype=complex)
E1 = np.array([0, 1], dtype=complex)


def random_vector(rng, n):
    return rng.normal(size=n) + 1j * rng.normal(size=n)


def random_matrix(rng, n, m=None):
    m = n if m is None else m
    return rng.normal(size=(n, m)) + 1j * rng.normal(size=(n, m))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture(params=sorted(PRESETS))
def any_preset(request):
    return preset(request.param)


@pytest.fixture
def amp():
    return preset("amplitude-damping")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
