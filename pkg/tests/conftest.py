from __future__ import annotations

import warnings

import pytest


@pytest.fixture(autouse=True)
def _quiet_truncation_warnings():
    # Gaussians never vanish exactly, so rasterizing one always warns that
    # the support is truncated; the operators account for that in their budgets.
    with warnings.catch_warnings():
        warnings.filterwarnings("ignore", message=".*truncated")
        yield


def pytest_terminal_summary(terminalreporter):
    module = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    outcomes = getattr(module, "OUTCOMES", None)
    if not outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(outcomes):
        status, title = outcomes[number]
        terminalreporter.write_line(f"criterion {number:2d}: {status}  {title}")
