"""``snowleopard`` command line.

Exit codes: 0 success, 1 test or coverage failure (or a refused
operation), 2 usage error.
"""

from __future__ import annotations

import argparse
import glob
import importlib
import importlib.util
import os
import sys
from collections.abc import Sequence
from pathlib import Path

from . import reduction
from .build import BuildError, LocalBuildInstaller, install_build
from .datacontainer import ContainerError, load_container
from .harness import DEFAULT_TIMEOUT, RunConfig, run_suite
from .logreport import BugDbError, RunDirectoryError, dashboard
from .schedule import ScheduleRequest, parse_time_of_day, schedule_commands, wait_until
from .suite import Priority, SuiteParseError
from .testlib import CaseRegistry, data_driven_case

PROG = "snowleopard"
DEFAULT_LOGS = "Logs"
DEFAULT_BUILD_SOURCE = "builds"


def _logs_root(arg: str | None) -> Path:
    return Path(arg or os.environ.get("SNOWLEOPARD_LOGS") or DEFAULT_LOGS)


def _load_cases_module(ref: str):
    if ref.endswith(".py") or os.sep in ref:
        path = Path(ref)
        spec = importlib.util.spec_from_file_location(f"_snowleopard_cases_{path.stem}", path)
        if spec is None or spec.loader is None:
            raise ImportError(f"cannot load {ref}")
        module = importlib.util.module_from_spec(spec)
        spec.loader.exec_module(module)
        return module
    return importlib.import_module(ref)


def _priority(text: str) -> Priority:
    try:
        return Priority.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive_float(text: str) -> float:
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _err(msg: str) -> None:
    print(f"{PROG}: {msg}", file=sys.stderr)


def cmd_run(args: argparse.Namespace) -> int:
    if args.suite is None and args.case is None:
        args.parser.error("run needs --suite or --case")
    logs = _logs_root(args.logs)
    registry = CaseRegistry(fallback=data_driven_case)
    driver_factory = None
    env_reset = None
    try:
        data = load_container(args.data)
    except (OSError, ContainerError) as exc:
        _err(f"cannot load test data: {exc}")
        return 1
    if args.cases:
        module = _load_cases_module(args.cases)
        module.register(registry)
        if hasattr(module, "make_driver"):
            driver_factory = lambda: module.make_driver(data)  # noqa: E731
        env_reset = getattr(module, "reset_environment", None)

    installer = None
    if args.build:
        installer = LocalBuildInstaller(args.build_source, logs / "builds")
    config = RunConfig(
        suite_path=Path(args.suite) if args.suite else None,
        data_path=Path(args.data),
        priority=args.priority,
        timeout=args.timeout,
        logs_root=logs,
        build_id=args.build,
        bugdb_path=Path(args.bugdb) if args.bugdb else None,
        outbox=Path(args.outbox) if args.outbox else None,
        case_id=args.case,
    )
    try:
        result = run_suite(
            config, registry, data=data, installer=installer,
            driver_factory=driver_factory, env_reset=env_reset,
        )
    except (OSError, SuiteParseError, BugDbError, BuildError, RunDirectoryError) as exc:
        _err(str(exc))
        return 1
    t = result.totals
    for case in result.results:
        line = f"{case.case_id}\t{case.status.value}"
        if case.failure_kind:
            line += f"\t{case.failure_kind.value}"
        if case.bug_id:
            line += f"\t{case.bug_id}"
        print(line)
    print(f"Suite {result.name}: {t.executed} executed, {t.passed} passed, {t.failed} failed")
    print(f"Report: {result.report_path}")
    return result.exit_code


def _load_spec(path: str) -> reduction.ParameterSpec:
    return reduction.parse_param_spec(Path(path).read_text(encoding="utf-8"))


def cmd_gen(args: argparse.Namespace) -> int:
    try:
        spec = _load_spec(args.params)
        if args.all:
            cset = reduction.gen_all(spec, cap=args.cap)
        else:
            cset = reduction.gen_tway(spec, args.strength, seed=args.seed)
    except reduction.EnumerationCapError as exc:
        _err(str(exc))
        return 1
    except (OSError, ValueError) as exc:
        _err(str(exc))
        return 1
    Path(args.out).write_text(reduction.write_rows_csv(cset), encoding="utf-8", newline="")
    print(f"{len(cset)} rows written to {args.out} "
          f"(full product: {reduction.count_all(spec)})")
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    try:
        spec = _load_spec(args.params)
        text = Path(args.rows).read_text(encoding="utf-8")
        cset = reduction.read_rows_csv(text, spec, args.strength)
        report = reduction.verify_coverage(cset, args.strength)
    except (OSError, ValueError) as exc:
        _err(str(exc))
        return 1
    if report.complete:
        print(f"complete: {len(cset)} rows cover every {args.strength}-way interaction")
        return 0
    print(f"incomplete: {len(report.uncovered)} uncovered {args.strength}-way interaction(s)")
    for line in reduction.interactions_as_text(report.uncovered):
        print(f"  {line}")
    return 1


def cmd_dashboard(args: argparse.Namespace) -> int:
    paths = sorted(glob.glob(args.reports, recursive=True))
    try:
        page = dashboard(paths, include_chart_url=args.chart_url)
    except (OSError, ValueError) as exc:
        _err(str(exc))
        return 1
    Path(args.out).write_text(page, encoding="utf-8")
    print(f"dashboard of {len(paths)} report(s) written to {args.out}")
    return 0


def cmd_schedule(args: argparse.Namespace) -> int:
    command = list(args.command)
    if command and command[0] == "--":
        command = command[1:]
    if not command:
        args.parser.error("schedule needs a command after --")
    if args.wait_until:
        try:
            parse_time_of_day(args.wait_until)
        except ValueError as exc:
            args.parser.error(str(exc))
        return wait_until(args.wait_until, command)
    if not args.at:
        args.parser.error("schedule needs --at or --wait-until")
    try:
        req = ScheduleRequest(args.at, tuple(command))
    except ValueError as exc:
        args.parser.error(str(exc))
    for kind, line in schedule_commands(req, PROG).items():
        print(f"{kind}: {line}")
    return 0


def cmd_build(args: argparse.Namespace) -> int:
    install_dir = Path(args.install_dir) if args.install_dir else _logs_root(args.logs) / "builds"
    installer = LocalBuildInstaller(args.build_source, install_dir)
    try:
        path = install_build(installer, args.build_id)
    except (BuildError, OSError) as exc:
        _err(str(exc))
        return 1
    print(f"build {args.build_id} installed from {path} into {install_dir}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description="Data-driven test automation harness.")
    sub = parser.add_subparsers(dest="command_name", required=True)

    p = sub.add_parser("run", help="run a suite or a single case")
    p.add_argument("--suite", help="suite CSV (test_case,run,priority)")
    p.add_argument("--data", required=True, help="XML test-data container")
    p.add_argument("--case", help="run only this case id")
    p.add_argument("--priority", type=_priority, help="lowest priority to run (Bat, P1, P2, P3)")
    p.add_argument("--timeout", type=_positive_float, default=DEFAULT_TIMEOUT,
                   help="per-case timeout in seconds (default %(default)s)")
    p.add_argument("--logs", help="logs root (default $SNOWLEOPARD_LOGS or Logs)")
    p.add_argument("--build", help="install this build id before running")
    p.add_argument("--build-source", default=DEFAULT_BUILD_SOURCE,
                   help="directory of builds, one entry per build id")
    p.add_argument("--bugdb", help="known-bug CSV (case_id,bug_id)")
    p.add_argument("--outbox", help="directory receiving the result mail")
    p.add_argument("--cases", help="module or .py file with a register(registry) function")
    p.set_defaults(func=cmd_run, parser=p)

    p = sub.add_parser("gen", help="generate test rows from a parameter spec")
    p.add_argument("--params", required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--all", action="store_true", help="full cartesian product")
    mode.add_argument("--strength", type=int, help="t-way covering set")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, help="seeded tie-breaking (default: none)")
    p.add_argument("--cap", type=int, default=reduction.DEFAULT_ENUMERATION_CAP,
                   help="maximum rows for --all (default %(default)s)")
    p.set_defaults(func=cmd_gen, parser=p)

    p = sub.add_parser("verify", help="check rows for complete t-way coverage")
    p.add_argument("--params", required=True)
    p.add_argument("--rows", required=True)
    p.add_argument("--strength", type=int, required=True)
    p.set_defaults(func=cmd_verify, parser=p)

    p = sub.add_parser("dashboard", help="HTML summary of suite reports")
    p.add_argument("--reports", required=True, help="glob of report CSVs")
    p.add_argument("--out", required=True)
    p.add_argument("--chart-url", action="store_true", help="also show the legacy chart URL")
    p.set_defaults(func=cmd_dashboard, parser=p)

    p = sub.add_parser("schedule", help="print scheduler commands for a later run")
    p.add_argument("--at", help="HH:MM")
    p.add_argument("--wait-until", help="HH:MM; sleep in-process, then run the command")
    p.add_argument("command", nargs=argparse.REMAINDER)
    p.set_defaults(func=cmd_schedule, parser=p)

    p = sub.add_parser("build", help="fetch and install a build")
    p.add_argument("build_id")
    p.add_argument("--build-source", default=DEFAULT_BUILD_SOURCE)
    p.add_argument("--install-dir")
    p.add_argument("--logs")
    p.set_defaults(func=cmd_build, parser=p)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
