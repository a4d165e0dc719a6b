import numpy as np
import pytest

from onebit_bnb import _pykernels, kernels

BACKENDS = [pytest.param(_pykernels, id="python")]
if kernels.compiled_backend is not None:
    BACKENDS.append(pytest.param(kernels.compiled_backend, id="compiled"))

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture(params=BACKENDS)
def backend(request):
    return request.param


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
