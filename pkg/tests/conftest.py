import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("repo", max_examples=60, deadline=None, derandomize=True)
settings.load_profile("repo")

_ACCEPTANCE: list[tuple[str, str]] = []


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance.py" in report.nodeid:
        _ACCEPTANCE.append((report.nodeid.split("::")[-1], "PASS" if report.passed else "FAIL"))


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for name, outcome in _ACCEPTANCE:
            terminalreporter.write_line(f"{outcome}  {name}")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
