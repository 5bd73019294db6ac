"""The run-test driver.

:func:`run_suite` installs the requested build, opens a timestamped run
directory with a report, runs each runnable suite entry through
:func:`execute_case`, and mails the report at the end. One case failing,
crashing or hanging never stops the suite.

Phases run in a worker thread so a hung phase can be abandoned once the
per-case timeout expires. The abandoned thread keeps only revoked proxies
of the log sink and driver, so it cannot write to either after the harness
has moved on. After a crash or timeout the driver is reset, the
environment-reset hook fires, and a fresh driver replaces the old one.
"""

from __future__ import annotations

import enum
import sys
import threading
import traceback
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path
from typing import Any

from .build import BuildInstaller, install_build
from .datacontainer import CaseNotFoundError, TestDataMap, load_container, lookup_case_data
from .drivers import DriverHandle, mock_app_for_data
from .logreport import (
    REPORT_FILENAME,
    BugDb,
    LogSink,
    MailError,
    Report,
    ReportRow,
    load_bugdb,
    locator_from_exception,
    lookup_bug,
    open_run_directory,
    send_mail,
)
from .suite import Priority, Suite, SuiteEntry, load_suite, select_runnable
from .testlib import CaseRegistry, TestCaseDefinition

__all__ = [
    "DEFAULT_TIMEOUT",
    "CaseResult",
    "CaseStatus",
    "FailureKind",
    "RunConfig",
    "SuiteResult",
    "Totals",
    "execute_case",
    "reset_environment",
    "run_suite",
    "summarize",
]

DEFAULT_TIMEOUT = 300.0

Clock = Callable[[], datetime]
EnvironmentReset = Callable[[], None]
Mailer = Callable[["SuiteResult", Path], Path]


class CaseStatus(str, enum.Enum):
    PASS = "Pass"
    FAIL = "Fail"
    SKIPPED = "Skipped"


class FailureKind(str, enum.Enum):
    ASSERTION = "assertion"
    CRASH = "crash"
    TIMEOUT = "timeout"
    SETUP_ERROR = "setup-error"


@dataclass
class RunConfig:
    suite_path: Path | None = None
    data_path: Path | None = None
    priority: Priority | None = None
    timeout: float = DEFAULT_TIMEOUT
    logs_root: Path = Path("Logs")
    build_id: str | None = None
    bugdb_path: Path | None = None
    outbox: Path | None = None
    case_id: str | None = None

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")


@dataclass
class CaseResult:
    case_id: str
    status: CaseStatus
    failure_kind: FailureKind | None = None
    start_time: datetime | None = None
    end_time: datetime | None = None
    bug_id: str | None = None
    message: str = ""
    phases: list[str] = field(default_factory=list)
    crash_dump: Path | str | None = None

    def __post_init__(self):
        if self.status is CaseStatus.FAIL and self.failure_kind is None:
            raise ValueError("a failed result needs a failure kind")
        if self.start_time and self.end_time and self.end_time < self.start_time:
            raise ValueError("end_time before start_time")

    @property
    def passed(self) -> bool:
        return self.status is CaseStatus.PASS


@dataclass(frozen=True)
class Totals:
    passed: int = 0
    failed: int = 0
    executed: int = 0


def summarize(results) -> Totals:
    passed = sum(1 for r in results if r.status is CaseStatus.PASS)
    failed = sum(1 for r in results if r.status is CaseStatus.FAIL)
    return Totals(passed, failed, passed + failed)


@dataclass
class SuiteResult:
    name: str
    results: list[CaseResult] = field(default_factory=list)
    run_dir: Path | None = None
    report_path: Path | None = None
    mail_path: Path | None = None

    @property
    def totals(self) -> Totals:
        return summarize(self.results)

    @property
    def exit_code(self) -> int:
        return 0 if self.totals.failed == 0 else 1

    def result(self, case_id: str) -> CaseResult:
        for r in self.results:
            if r.case_id == case_id:
                return r
        raise KeyError(case_id)


class _Revoked(RuntimeError):
    pass


class _Revocable:
    """Attribute proxy that stops working once revoked."""

    def __init__(self, target):
        object.__setattr__(self, "_target", target)
        object.__setattr__(self, "_revoked", False)

    def revoke(self) -> None:
        object.__setattr__(self, "_revoked", True)

    def __getattr__(self, name):
        if object.__getattribute__(self, "_revoked"):
            raise _Revoked("phase abandoned by the harness")
        return getattr(object.__getattribute__(self, "_target"), name)


@dataclass
class _Outcome:
    done: list[str] = field(default_factory=list)
    current: str | None = None
    kind: FailureKind | None = None
    phase: str | None = None
    exc: BaseException | None = None
    tb: str = ""
    locator: tuple[str, int] | None = None


def _record_failure(outcome: _Outcome, name: str, kind: FailureKind, exc: BaseException):
    outcome.kind = kind
    outcome.phase = name
    outcome.exc = exc
    outcome.tb = "".join(traceback.format_exception(type(exc), exc, exc.__traceback__))
    outcome.locator = locator_from_exception(exc)


def _run_phases(defn: TestCaseDefinition, names, params, driver, log, outcome: _Outcome):
    for name in names:
        outcome.current = name
        func = defn.phase(name)
        try:
            log.info(f"{name} phase started")
            ret = func(params, driver, log)
        except AssertionError as exc:
            _record_failure(outcome, name, FailureKind.ASSERTION, exc)
            return
        except _Revoked:
            return
        except BaseException as exc:  # noqa: BLE001 crash containment
            _record_failure(outcome, name, FailureKind.CRASH, exc)
            return
        if ret is False:
            outcome.kind = FailureKind.ASSERTION
            outcome.phase = name
            code = getattr(func, "__code__", None)
            if code is not None:
                outcome.locator = (code.co_filename, code.co_firstlineno)
            return
        outcome.done.append(name)


def _run_with_deadline(target, timeout: float) -> threading.Thread:
    worker = threading.Thread(target=target, daemon=True)
    worker.start()
    worker.join(timeout)
    return worker


def _thread_stack(thread: threading.Thread) -> str:
    frame = sys._current_frames().get(thread.ident)
    if frame is None:
        return ""
    return "".join(traceback.format_stack(frame))


def execute_case(
    defn: TestCaseDefinition,
    param_map: Mapping[str, Any] | None,
    driver: DriverHandle,
    timeout: float = DEFAULT_TIMEOUT,
    *,
    run_dir: Path | None = None,
    clock: Clock = datetime.now,
    setup_error: str | None = None,
) -> CaseResult:
    """Run one case: setup, steps, validation, then cleanup exactly once.

    With ``run_dir`` the case logs to ``run_dir/<case_id>.log`` and crash or
    timeout context goes to ``run_dir/<case_id>.crash``. ``setup_error``
    marks the case as failed before any phase runs (e.g. no test data); its
    cleanup still runs.
    """
    start = clock()
    case_id = defn.case_id
    try:
        sink = LogSink(run_dir / f"{case_id}.log" if run_dir else None, clock=clock)
    except OSError as exc:
        sink = LogSink(None, clock=clock)
        setup_error = setup_error or f"cannot open log file: {exc}"
    sink.info("Logging Started...")
    params = dict(param_map or {})

    outcome = _Outcome()
    kind: FailureKind | None = None
    message = ""
    dump_text = ""
    if setup_error is not None:
        kind = FailureKind.SETUP_ERROR
        message = setup_error
        sink.failed(f"setup error: {setup_error}")
    else:
        log_proxy, drv_proxy = _Revocable(sink), _Revocable(driver)
        worker = _run_with_deadline(
            lambda: _run_phases(
                defn, ("setup", "steps", "validation"), params, drv_proxy, log_proxy, outcome
            ),
            timeout,
        )
        if worker.is_alive():
            log_proxy.revoke()
            drv_proxy.revoke()
            kind = FailureKind.TIMEOUT
            message = f"timed out after {timeout:g} s in {outcome.current} phase"
            sink.failed(message)
            dump_text = f"{message}\n\nStack of the abandoned phase:\n{_thread_stack(worker)}"
        elif outcome.kind is not None:
            kind = outcome.kind
            exc = outcome.exc
            detail = f"{type(exc).__name__}: {exc}" if exc is not None else "returned False"
            if kind is FailureKind.CRASH:
                message = f"crash in {outcome.phase} phase: {detail}"
            else:
                message = f"{outcome.phase} failed: {exc}" if exc is not None and str(exc) \
                    else f"{outcome.phase} failed"
            sink.failed(message, outcome.locator)
            if kind is FailureKind.CRASH:
                dump_text = f"{message}\n\n{outcome.tb}"

    crash_dump: Path | str | None = None
    if kind in (FailureKind.CRASH, FailureKind.TIMEOUT):
        log_tail = getattr(driver, "action_log", None)
        if log_tail is not None:
            dump_text += "\nDriver actions:\n" + "".join(f"  {a}\n" for a in log_tail[-50:])
        crash_dump = dump_text
        if run_dir is not None:
            path = run_dir / f"{case_id}.crash"
            try:
                path.write_text(dump_text, encoding="utf-8")
                crash_dump = path
                sink.info(f"crash dump saved to {path.name}")
            except OSError as exc:
                sink.failed(f"cannot save crash dump: {exc}")

    # cleanup runs exactly once, whatever happened above
    cleanup = _Outcome()
    clog, cdrv = _Revocable(sink), _Revocable(driver)
    worker = _run_with_deadline(
        lambda: _run_phases(defn, ("cleanup",), params, cdrv, clog, cleanup), timeout
    )
    if worker.is_alive():
        clog.revoke()
        cdrv.revoke()
        sink.failed(f"cleanup timed out after {timeout:g} s")
    elif cleanup.kind is not None:
        sink.failed(f"cleanup failed: {cleanup.exc}", cleanup.locator)

    if kind is None:
        status = CaseStatus.PASS
        sink.passed(f"{case_id} passed")
    else:
        status = CaseStatus.FAIL
        sink.failed(f"{case_id} failed ({kind.value})")
    sink.close()
    end = clock()
    return CaseResult(
        case_id,
        status,
        kind,
        start,
        max(end, start),
        message=message,
        phases=outcome.done + cleanup.done,
        crash_dump=crash_dump,
    )


def reset_environment(
    hook: EnvironmentReset | None, driver: DriverHandle | None = None, log: LogSink | None = None
) -> None:
    """Restore a clean environment after a crash or timeout.

    Failures of either step are logged and swallowed; the caller replaces the
    driver regardless.
    """
    if driver is not None:
        try:
            driver.reset()
        except Exception as exc:  # noqa: BLE001
            if log is not None:
                log.failed(f"driver reset failed: {exc}")
    if hook is not None:
        try:
            hook()
        except Exception as exc:  # noqa: BLE001
            if log is not None:
                log.failed(f"environment reset hook failed: {exc}")


def _default_mailer(outbox: Path, clock: Clock) -> Mailer:
    def mail(result: SuiteResult, report_path: Path) -> Path:
        return send_mail(outbox, result, report_path, now=clock())

    return mail


def run_suite(
    config: RunConfig,
    registry: CaseRegistry,
    *,
    suite: Suite | None = None,
    data: TestDataMap | None = None,
    installer: BuildInstaller | None = None,
    mailer: Mailer | None = None,
    driver_factory: Callable[[], DriverHandle] | None = None,
    env_reset: EnvironmentReset | None = None,
    bugdb: BugDb | None = None,
    suite_setup: Callable[[Path], None] | None = None,
    suite_cleanup: Callable[[SuiteResult], None] | None = None,
    clock: Clock = datetime.now,
) -> SuiteResult:
    # everything that can be rejected up front is, before anything runs
    if data is None:
        if config.data_path is None:
            raise ValueError("no test data container given")
        data = load_container(config.data_path)
    if suite is None:
        if config.case_id is not None:
            name = Path(config.suite_path).stem if config.suite_path else "adhoc"
            suite = Suite(name, (SuiteEntry(config.case_id, True, Priority.BAT),))
        elif config.suite_path is not None:
            suite = load_suite(config.suite_path)
        else:
            raise ValueError("no suite or case given")
    if bugdb is None and config.bugdb_path is not None:
        bugdb = load_bugdb(config.bugdb_path)
    if driver_factory is None:
        driver_factory = lambda: mock_app_for_data(data)  # noqa: E731

    if config.build_id is not None:
        if installer is None:
            raise ValueError(f"build {config.build_id!r} requested but no installer given")
        install_build(installer, config.build_id)

    run_dir = open_run_directory(config.logs_root, clock())
    report = Report(run_dir / REPORT_FILENAME)
    suite_log = LogSink(run_dir / "suite.log", clock=clock)
    suite_log.info(f"Suite {suite.name} started")
    if config.build_id is not None:
        suite_log.info(f"Build {config.build_id} installed")
    result = SuiteResult(suite.name, run_dir=run_dir, report_path=report.path)
    if suite_setup is not None:
        suite_setup(run_dir)

    runnable = set(select_runnable(suite, config.priority))
    driver = driver_factory()
    for entry in suite.entries:
        if entry.case_id not in runnable:
            report.complete(ReportRow(entry.case_id, status=CaseStatus.SKIPPED.value))
            result.results.append(CaseResult(entry.case_id, CaseStatus.SKIPPED))
            suite_log.info(f"{entry.case_id} skipped")
            continue

        started = clock()
        report.start(entry.case_id, started)
        suite_log.info(f"{entry.case_id} started")
        setup_error = None
        params = None
        try:
            defn = registry.get(entry.case_id)
        except KeyError as exc:
            defn = None
            setup_error = str(exc.args[0]) if exc.args else str(exc)
        if defn is not None:
            try:
                params = lookup_case_data(data, entry.case_id)
            except CaseNotFoundError as exc:
                setup_error = str(exc)
            driver.reset()
            case = execute_case(
                defn, params, driver, config.timeout,
                run_dir=run_dir, clock=clock, setup_error=setup_error,
            )
        else:
            case = CaseResult(
                entry.case_id, CaseStatus.FAIL, FailureKind.SETUP_ERROR,
                started, clock(), message=setup_error or "",
            )
        if case.status is CaseStatus.FAIL:
            case.bug_id = lookup_bug(bugdb, entry.case_id)
        report.complete(
            ReportRow(entry.case_id, case.start_time, case.end_time,
                      case.status.value, case.bug_id or "")
        )
        result.results.append(case)
        if case.status is CaseStatus.PASS:
            suite_log.passed(f"{entry.case_id} passed")
        else:
            suite_log.failed(f"{entry.case_id} failed ({case.failure_kind.value}): {case.message}")
        if case.failure_kind in (FailureKind.CRASH, FailureKind.TIMEOUT):
            reset_environment(env_reset, driver, suite_log)
            driver = driver_factory()

    if suite_cleanup is not None:
        suite_cleanup(result)
    totals = result.totals
    suite_log.info(
        f"Suite {suite.name} finished: {totals.executed} executed, "
        f"{totals.passed} passed, {totals.failed} failed"
    )
    if mailer is None:
        mailer = _default_mailer(config.outbox or Path(config.logs_root) / "outbox", clock)
    try:
        result.mail_path = mailer(result, report.path)
    except MailError as exc:
        suite_log.failed(f"mail not sent: {exc}")
    suite_log.close()
    return result
