from __future__ import annotations

from datetime import datetime, timedelta
from pathlib import Path

import pytest

FIXTURES = Path(__file__).parent / "fixtures"

SAMPLE_XML = """<tcs >
  <tc name="tc1" playername="man1" freq="50 or 25">
  </tc>
  <tc name="tc2" playername="man2" freq="29.97">
  </tc>
</tcs>
"""

_acceptance: dict[int, dict] = {}


def pytest_runtest_logreport(report):
    number = getattr(report, "acceptance_number", None)
    if number is None:
        return
    entry = _acceptance.setdefault(number, {"title": report.acceptance_title, "ok": True, "seen": False})
    if report.when == "call" or report.failed:
        entry["seen"] = True
        if report.failed:
            entry["ok"] = False


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is not None:
        rep.acceptance_number = marker.args[0]
        rep.acceptance_title = marker.args[1]


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_acceptance):
        entry = _acceptance[number]
        if not entry["seen"]:
            continue
        verdict = "PASS" if entry["ok"] else "FAIL"
        terminalreporter.write_line(f"[{verdict}] {number}. {entry['title']}")


class StepClock:
    """Deterministic clock advancing one second per call."""

    def __init__(self, start: datetime = datetime(2010, 8, 3, 12, 7, 28), step: float = 1.0):
        self.now = start
        self.step = timedelta(seconds=step)

    def __call__(self) -> datetime:
        current = self.now
        self.now += self.step
        return current


@pytest.fixture
def clock():
    return StepClock()


@pytest.fixture
def sample_xml() -> str:
    return SAMPLE_XML


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES
