import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from icvcdf import _pava_py, monotone  # noqa: E402

try:
    from icvcdf import _pava as _compiled
except ImportError:
    _compiled = None

BACKENDS = [pytest.param(_pava_py, id="python")]
if _compiled is not None:
    BACKENDS.append(pytest.param(_compiled, id="compiled"))

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


@pytest.fixture(params=BACKENDS)
def backend(request, monkeypatch):
    """Run the test once per available PAVA kernel."""
    monkeypatch.setattr(monotone, "_kernels", request.param)
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)



def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
