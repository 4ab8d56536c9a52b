import numpy as np
import pytest

from sqsearch.encoding import Dataset
from sqsearch.sim.circuit import index_to_bits

ALL4 = tuple(index_to_bits(j, 4) for j in range(16))

_acceptance_lines: list[str] = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def d_prime():
    """The 15-entry dataset with '1101' removed."""
    return Dataset(4, tuple(e for e in ALL4 if e != "1101"))


@pytest.fixture
def criterion(request):
    """Record one PASS/FAIL line per acceptance criterion."""
    def _report(label: str):
        outcome = {"label": label}
        request.node._acceptance = outcome
        return outcome

    yield _report


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    label = getattr(item, "_acceptance", None)
    if label is not None and rep.when == "call":
        status = "PASS" if rep.passed else "FAIL"
        _acceptance_lines.append(f"[{status}] {label['label']}")


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in _acceptance_lines:
            terminalreporter.write_line(line)
