"""Logging, suite reports, bug cross-reference, offline mail and dashboard.

Log lines carry a timestamp and a level tag::

    3-8-2010 12:07:28 [INFO] Logging Started...
    3-8-2010 12:08:34 [FAILED] at C:\\Perl\\lib\\Class.pm line 113.

Reports are CSV files (``id,start_time,end_time,status,bug_id``) rewritten in
full every time an entry changes, so a crashed run still leaves a readable
report of everything up to the crash.
"""

from __future__ import annotations

import csv
import enum
import hashlib
import html
import io
import math
import os
import traceback
from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from datetime import datetime
from email.message import EmailMessage
from email.utils import format_datetime
from pathlib import Path
from typing import TextIO

__all__ = [
    "REPORT_FILENAME",
    "REPORT_HEADER",
    "BugDb",
    "BugDbError",
    "DashboardTotals",
    "LogLevel",
    "LogRecord",
    "LogSink",
    "MailError",
    "Report",
    "ReportError",
    "ReportRow",
    "RunDirectoryError",
    "aggregate_reports",
    "append_report_row",
    "chart_url",
    "dashboard",
    "format_log_line",
    "load_bugdb",
    "locator_from_exception",
    "lookup_bug",
    "open_run_directory",
    "read_report",
    "send_mail",
]

REPORT_FILENAME = "report.csv"
REPORT_HEADER = ("id", "start_time", "end_time", "status", "bug_id")

Clock = Callable[[], datetime]


class LogLevel(str, enum.Enum):
    INFO = "INFO"
    PASSED = "PASSED"
    FAILED = "FAILED"


@dataclass(frozen=True)
class LogRecord:
    timestamp: datetime
    level: LogLevel
    message: str
    locator: tuple[str, int] | None = None

    def render(self) -> str:
        return format_log_line(self.timestamp, self.level, self.message, self.locator)


def format_log_line(
    timestamp: datetime,
    level: LogLevel | str,
    message: str,
    locator: tuple[str, int] | None = None,
) -> str:
    level = LogLevel(level)
    stamp = f"{timestamp.day}-{timestamp.month}-{timestamp.year} {timestamp:%H:%M:%S}"
    # one record is always one line, even for multi-line exception text
    text = " ".join(message.splitlines()) if "\n" in message or "\r" in message else message
    if locator is not None:
        where = f"at {locator[0]} line {locator[1]}."
        text = f"{text} {where}" if text else where
    return f"{stamp} [{level.value}] {text}"


def locator_from_exception(exc: BaseException) -> tuple[str, int] | None:
    """File and line where ``exc`` was raised (innermost frame)."""
    frames = traceback.extract_tb(exc.__traceback__)
    if not frames:
        return None
    last = frames[-1]
    return (last.filename, last.lineno)


class LogSink:
    """Per-case log file. One writer; every call appends exactly one line.

    ``path=None`` keeps records in memory only.
    """

    def __init__(self, path: str | Path | None = None, clock: Clock = datetime.now):
        self.path = Path(path) if path is not None else None
        self.clock = clock
        self.records: list[LogRecord] = []
        self._fh: TextIO | None = None
        self._closed = False
        if self.path is not None:
            self._fh = open(self.path, "a", encoding="utf-8", newline="\n")

    @property
    def closed(self) -> bool:
        return self._closed

    def log(
        self,
        level: LogLevel | str,
        message: str,
        locator: tuple[str, int] | None = None,
    ) -> LogRecord:
        if self._closed:
            raise ValueError("log sink is closed")
        record = LogRecord(self.clock(), LogLevel(level), message, locator)
        if self._fh is not None:
            self._fh.write(record.render() + "\n")
            self._fh.flush()
        self.records.append(record)
        return record

    def info(self, message: str) -> LogRecord:
        return self.log(LogLevel.INFO, message)

    def passed(self, message: str) -> LogRecord:
        return self.log(LogLevel.PASSED, message)

    def failed(self, message: str = "", locator: tuple[str, int] | None = None) -> LogRecord:
        return self.log(LogLevel.FAILED, message, locator)

    def lines(self) -> list[str]:
        return [r.render() for r in self.records]

    def close(self) -> None:
        if self._closed:
            return
        self._closed = True
        if self._fh is not None:
            self._fh.close()

    def __enter__(self) -> LogSink:
        return self

    def __exit__(self, *exc) -> None:
        self.close()


class RunDirectoryError(OSError):
    pass


def open_run_directory(root: str | Path, now: datetime) -> Path:
    """Create ``root/YYYYMMDD_HHMMSS`` (``_2``, ``_3``... on collision) and
    an empty report inside it."""
    root = Path(root)
    base = now.strftime("%Y%m%d_%H%M%S")
    try:
        root.mkdir(parents=True, exist_ok=True)
        suffix = 1
        while True:
            name = base if suffix == 1 else f"{base}_{suffix}"
            path = root / name
            try:
                path.mkdir()
                break
            except FileExistsError:
                suffix += 1
        Report(path / REPORT_FILENAME)
    except OSError as exc:
        raise RunDirectoryError(f"cannot create run directory under {root}: {exc}") from exc
    return path


@dataclass
class ReportRow:
    id: str
    start_time: datetime | None = None
    end_time: datetime | None = None
    status: str = ""
    bug_id: str = ""

    def cells(self) -> list[str]:
        fmt = lambda t: "" if t is None else t.strftime("%H:%M")  # noqa: E731
        return [self.id, fmt(self.start_time), fmt(self.end_time), self.status, self.bug_id or ""]


class ReportError(RuntimeError):
    pass


class Report:
    """The suite report file, written as each case starts and finishes."""

    def __init__(self, path: str | Path):
        self.path = Path(path)
        self.rows: list[ReportRow] = []
        self._open: set[str] = set()
        self._flush()

    def start(self, case_id: str, start_time: datetime) -> ReportRow:
        if any(r.id == case_id for r in self.rows):
            raise ReportError(f"case {case_id!r} already has a report row")
        row = ReportRow(case_id, start_time)
        self.rows.append(row)
        self._open.add(case_id)
        self._flush()
        return row

    def complete(self, row: ReportRow) -> None:
        if row.status == "Skipped" and row.id not in self._open:
            if any(r.id == row.id for r in self.rows):
                raise ReportError(f"case {row.id!r} already has a report row")
            self.rows.append(row)
            self._flush()
            return
        if row.id not in self._open:
            raise ReportError(f"case {row.id!r} was never started")
        self._open.discard(row.id)
        for i, existing in enumerate(self.rows):
            if existing.id == row.id:
                if row.start_time is None:
                    row.start_time = existing.start_time
                self.rows[i] = row
        self._flush()

    def render(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for row in self.rows:
            writer.writerow(row.cells())
        return buf.getvalue()

    def _flush(self) -> None:
        tmp = self.path.with_name(self.path.name + ".tmp")
        tmp.write_text(self.render(), encoding="utf-8")
        os.replace(tmp, self.path)


def append_report_row(report: Report, row: ReportRow) -> None:
    report.complete(row)


def read_report(path: str | Path) -> list[dict[str, str]]:
    text = Path(path).read_text(encoding="utf-8")
    reader = csv.DictReader(io.StringIO(text))
    if tuple(reader.fieldnames or ()) != REPORT_HEADER:
        raise ReportError(f"{path}: not a suite report (header {reader.fieldnames!r})")
    return list(reader)


class BugDbError(ValueError):
    pass


@dataclass(frozen=True)
class BugDb:
    """Known open bugs, keyed by test-case id."""

    bugs: Mapping[str, str] = field(default_factory=dict)

    def lookup(self, case_id: str) -> str | None:
        return self.bugs.get(case_id)


def load_bugdb(path: str | Path) -> BugDb:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise BugDbError(f"cannot read bug database {path}: {exc}") from exc
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != ["case_id", "bug_id"]:
        raise BugDbError(f"{path}: expected header 'case_id,bug_id'")
    bugs: dict[str, str] = {}
    for row_no, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != 2 or not record[0].strip() or not record[1].strip():
            raise BugDbError(f"{path}: malformed row {row_no}")
        bugs[record[0].strip()] = record[1].strip()
    return BugDb(bugs)


def lookup_bug(db: BugDb | None, case_id: str) -> str | None:
    if db is None:
        return None
    return db.lookup(case_id)


class MailError(OSError):
    pass


def send_mail(
    outbox: str | Path,
    suite_result,
    report_path: str | Path,
    recipients: Iterable[str] = (),
    sender: str = "snowleopard@localhost",
    now: datetime | None = None,
) -> Path:
    """Write the end-of-suite mail, with the report attached, to ``outbox``."""
    now = now or datetime.now()
    totals = suite_result.totals
    msg = EmailMessage()
    msg["Subject"] = (
        f"Suite {suite_result.name}: {totals.passed} passed, {totals.failed} failed"
    )
    msg["From"] = sender
    msg["To"] = ", ".join(recipients) or "undisclosed-recipients:;"
    msg["Date"] = format_datetime(now)
    msg.set_content(
        f"Suite: {suite_result.name}\n"
        f"Executed: {totals.executed}\n"
        f"Passed: {totals.passed}\n"
        f"Failed: {totals.failed}\n"
    )
    try:
        report_path = Path(report_path)
        msg.add_attachment(
            report_path.read_bytes(),
            maintype="text",
            subtype="csv",
            filename=report_path.name,
        )
        # content-derived boundary keeps identical runs byte-identical
        digest = hashlib.sha1(msg.get_body().get_content().encode() + report_path.read_bytes())
        msg.set_boundary(f"snowleopard-{digest.hexdigest()}")
        outbox = Path(outbox)
        outbox.mkdir(parents=True, exist_ok=True)
        stem = f"{suite_result.name}_{now:%Y%m%d_%H%M%S}"
        path = outbox / f"{stem}.eml"
        n = 2
        while path.exists():
            path = outbox / f"{stem}_{n}.eml"
            n += 1
        path.write_bytes(msg.as_bytes())
    except OSError as exc:
        raise MailError(f"cannot write mail to {outbox}: {exc}") from exc
    return path


@dataclass(frozen=True)
class DashboardTotals:
    passed: int = 0
    failed: int = 0
    skipped: int = 0
    reports: int = 0

    @property
    def total(self) -> int:
        return self.passed + self.failed


def aggregate_reports(report_paths: Iterable[str | Path]) -> DashboardTotals:
    passed = failed = skipped = n = 0
    for path in report_paths:
        n += 1
        for row in read_report(path):
            status = row["status"]
            if status == "Pass":
                passed += 1
            elif status == "Fail":
                failed += 1
            elif status == "Skipped":
                skipped += 1
    return DashboardTotals(passed, failed, skipped, n)


def chart_url(passed: int, failed: int) -> str:
    """Pie-chart query string in the old image-chart API style (never fetched)."""
    return f"cht=p&chd=t:{passed},{failed}&chl=Pass|Fail"


_PIE_COLORS = {"pass": "#2e9e44", "fail": "#d23c3c"}


def _pie_svg(passed: int, failed: int, radius: float = 90.0) -> str:
    size = 2 * radius + 20
    cx = cy = size / 2
    total = passed + failed
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:g}" height="{size:g}" '
        f'viewBox="0 0 {size:g} {size:g}" role="img" aria-label="pass/fail pie chart">'
    ]
    slices = [(k, v) for k, v in (("pass", passed), ("fail", failed)) if v]
    if total == 0:
        parts.append(
            f'<circle cx="{cx:g}" cy="{cy:g}" r="{radius:g}" fill="#cccccc" class="slice empty"/>'
        )
    elif len(slices) == 1:
        kind, count = slices[0]
        parts.append(
            f'<circle cx="{cx:g}" cy="{cy:g}" r="{radius:g}" fill="{_PIE_COLORS[kind]}" '
            f'class="slice {kind}" data-count="{count}" data-angle="360"/>'
        )
    else:
        angle = 0.0
        for kind, count in slices:
            sweep = 360.0 * count / total
            a0 = math.radians(angle - 90)
            a1 = math.radians(angle + sweep - 90)
            x0, y0 = cx + radius * math.cos(a0), cy + radius * math.sin(a0)
            x1, y1 = cx + radius * math.cos(a1), cy + radius * math.sin(a1)
            large = 1 if sweep > 180 else 0
            parts.append(
                f'<path d="M{cx:g},{cy:g} L{x0:.3f},{y0:.3f} '
                f'A{radius:g},{radius:g} 0 {large} 1 {x1:.3f},{y1:.3f} Z" '
                f'fill="{_PIE_COLORS[kind]}" class="slice {kind}" '
                f'data-count="{count}" data-angle="{sweep:.6f}"/>'
            )
            angle += sweep
    parts.append("</svg>")
    return "".join(parts)


def dashboard(
    report_paths: Iterable[str | Path],
    title: str = "Test dashboard",
    include_chart_url: bool = False,
) -> str:
    """Self-contained HTML page summarizing one or more suite reports."""
    paths = list(report_paths)
    totals = aggregate_reports(paths)
    esc = html.escape
    if totals.reports == 0:
        body = '<p class="empty">No reports found.</p>'
    else:
        rows = "".join(
            f"<tr><th>{label}</th><td>{value}</td></tr>"
            for label, value in (
                ("Total", totals.total),
                ("Passed", totals.passed),
                ("Failed", totals.failed),
                ("Skipped", totals.skipped),
                ("Reports", totals.reports),
            )
        )
        body = (
            f'<div class="chart">{_pie_svg(totals.passed, totals.failed)}</div>'
            f'<table class="totals">{rows}</table>'
        )
        if include_chart_url:
            body += f'<p class="chart-url"><code>{esc(chart_url(totals.passed, totals.failed))}</code></p>'
        sources = "".join(f"<li>{esc(str(p))}</li>" for p in paths)
        body += f'<h2>Reports</h2><ul class="sources">{sources}</ul>'
    return (
        "<!doctype html>\n"
        '<html lang="en"><head><meta charset="utf-8">'
        f"<title>{esc(title)}</title>"
        "<style>body{font-family:sans-serif;margin:2rem}"
        "table{border-collapse:collapse}th,td{padding:.3rem .8rem;text-align:left;"
        "border-bottom:1px solid #ddd}.empty{color:#666}</style>"
        f"</head><body><h1>{esc(title)}</h1>{body}</body></html>\n"
    )
