import numpy as np
import pytest

from frametop import _kernels

try:
    from hypothesis import HealthCheck, settings

    settings.register_profile("default", deadline=None, max_examples=60,
                              suppress_health_check=[HealthCheck.too_slow])
    settings.load_profile("default")
except ImportError:  # pragma: no cover
    pass


@pytest.fixture(params=sorted(_kernels.backends()))
def kernels(request):
    """Each available kernel backend in turn."""
    return _kernels.backends()[request.param]


def close(a, b, tol):
    return np.max(np.abs(np.asarray(a) - np.asarray(b))) <= tol


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
