import numpy as np
import pytest

from kvquant.model import proton_params


@pytest.fixture
def proton():
    return proton_params()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture
def record(request):
    """Log one acceptance line ``[PASS|FAIL] label: detail``, then assert it."""
    lines = request.config.stash.setdefault(ACCEPTANCE, [])

    def _record(label, ok, detail):
        lines.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"

    return _record


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
