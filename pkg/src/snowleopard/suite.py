"""Suite files: one CSV per feature listing test cases, run flags and priorities.

A suite file looks like::

    test_case,run,priority
    TC1,Y,Bat
    TC2,N,P1
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from pathlib import Path

__all__ = [
    "HEADER",
    "Priority",
    "Suite",
    "SuiteEntry",
    "SuiteParseError",
    "load_suite",
    "parse_suite",
    "select_runnable",
    "serialize_suite",
]

HEADER = ("test_case", "run", "priority")


class SuiteParseError(ValueError):
    def __init__(self, message: str, row: int | None = None):
        self.row = row
        if row is not None:
            message = f"row {row}: {message}"
        super().__init__(message)


class Priority(enum.IntEnum):
    """Lower value means more important; BAT runs on every build."""

    BAT = 0
    P1 = 1
    P2 = 2
    P3 = 3

    @classmethod
    def parse(cls, text: str) -> Priority:
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise ValueError(f"unknown priority {text!r}") from None

    @property
    def label(self) -> str:
        return "Bat" if self is Priority.BAT else self.name

    def __str__(self) -> str:
        return self.label


@dataclass(frozen=True)
class SuiteEntry:
    case_id: str
    run: bool
    priority: Priority

    def __post_init__(self):
        if not self.case_id:
            raise ValueError("case_id cannot be empty")


@dataclass(frozen=True)
class Suite:
    name: str
    entries: tuple[SuiteEntry, ...] = ()

    def __post_init__(self):
        entries = tuple(self.entries)
        object.__setattr__(self, "entries", entries)
        ids = [e.case_id for e in entries]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate case_id in suite")

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def entry(self, case_id: str) -> SuiteEntry:
        for e in self.entries:
            if e.case_id == case_id:
                return e
        raise KeyError(case_id)


def _parse_run_flag(text: str) -> bool:
    flag = text.strip().upper()
    if flag == "Y":
        return True
    if flag == "N":
        return False
    raise ValueError(f"invalid run flag {text!r} (expected Y or N)")


def parse_suite(text: str, name: str) -> Suite:
    """Parse a suite CSV. Row numbers in errors count the header as row 1."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or tuple(h.strip().lower() for h in header) != HEADER:
        raise SuiteParseError(f"missing header {','.join(HEADER)!r}", 1)

    entries: list[SuiteEntry] = []
    seen: set[str] = set()
    for row_no, record in enumerate(reader, start=2):
        if not record or all(not cell.strip() for cell in record):
            continue
        if len(record) != 3:
            raise SuiteParseError(f"expected 3 columns, got {len(record)}", row_no)
        case_id = record[0].strip()
        if not case_id:
            raise SuiteParseError("empty test_case", row_no)
        if case_id in seen:
            raise SuiteParseError(f"duplicate test case {case_id!r}", row_no)
        try:
            run = _parse_run_flag(record[1])
            priority = Priority.parse(record[2])
        except ValueError as exc:
            raise SuiteParseError(str(exc), row_no) from None
        seen.add(case_id)
        entries.append(SuiteEntry(case_id, run, priority))
    return Suite(name, tuple(entries))


def load_suite(path: str | Path) -> Suite:
    path = Path(path)
    return parse_suite(path.read_text(encoding="utf-8"), path.stem)


def serialize_suite(suite: Suite) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(HEADER)
    for e in suite.entries:
        writer.writerow([e.case_id, "Y" if e.run else "N", e.priority.label])
    return buf.getvalue()


def select_runnable(suite: Suite, max_priority: Priority | None = None) -> list[str]:
    """Case ids with Run=Y and, when filtering, priority at or above ``max_priority``."""
    return [
        e.case_id
        for e in suite.entries
        if e.run and (max_priority is None or e.priority <= max_priority)
    ]
