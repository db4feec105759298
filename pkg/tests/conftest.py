import pytest

from spinqnet import _kernels


@pytest.fixture(params=_kernels.available_backends())
def backend(request, monkeypatch):
    """Run the test once per kernel backend (numpy, and numba if installed)."""
    kernels = _kernels.get_backend(request.param)
    monkeypatch.setattr(_kernels, "active", kernels)
    return kernels


def pytest_terminal_summary(terminalreporter):
    """Print the acceptance-criteria lines collected by test_acceptance."""
    import sys

    module = sys.modules.get("test_acceptance")
    lines = getattr(module, "LINES", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
