"""Instrumented cases loaded by ``snowleopard run --cases``.

Every phase call and every environment reset appends a line to
``$CRASHCASES_LOG`` so a parent process can count them.
"""

import os
import threading

from snowleopard.drivers import MockWebApp
from snowleopard.testlib import TestCaseDefinition

FAULTS = {"c2": "crash", "h2": "hang"}


def _note(text):
    with open(os.environ["CRASHCASES_LOG"], "a", encoding="utf-8") as fh:
        fh.write(text + "\n")


def _phase(case_id, name):
    def run(params, driver, log):
        _note(f"{case_id} {name}")
        log.info(f"{case_id} {name}")
        if name == "steps" and FAULTS.get(case_id) == "crash":
            raise RuntimeError("injected crash")
        if name == "steps" and FAULTS.get(case_id) == "hang":
            threading.Event().wait(30)
    return run


def register(registry):
    for case_id in ("c1", "c2", "c3", "h1", "h2", "h3"):
        registry.register(TestCaseDefinition(
            case_id, *(_phase(case_id, n) for n in ("setup", "steps", "validation", "cleanup"))))


def make_driver(data):
    return MockWebApp({"Config": []})


def reset_environment():
    _note("reset")
