"""Scheduled suite runs.

Nothing here talks to an OS scheduler. :func:`schedule_commands` returns the
command lines that would register the job; :func:`wait_until` is the
portable fallback, sleeping in-process until the requested time.
"""

from __future__ import annotations

import re
import shlex
import subprocess
import time
from collections.abc import Callable, Sequence
from dataclasses import dataclass
from datetime import datetime, timedelta

__all__ = ["ScheduleRequest", "parse_time_of_day", "schedule_commands", "seconds_until", "wait_until"]

_TIME_RE = re.compile(r"^(\d{1,2}):(\d{2})$")


def parse_time_of_day(text: str) -> tuple[int, int]:
    m = _TIME_RE.match(text.strip())
    if not m:
        raise ValueError(f"invalid time {text!r} (expected HH:MM)")
    hour, minute = int(m.group(1)), int(m.group(2))
    if hour > 23 or minute > 59:
        raise ValueError(f"invalid time {text!r} (expected 00:00-23:59)")
    return hour, minute


@dataclass(frozen=True)
class ScheduleRequest:
    at: str
    command: tuple[str, ...]

    def __post_init__(self):
        hour, minute = parse_time_of_day(self.at)
        object.__setattr__(self, "at", f"{hour:02d}:{minute:02d}")
        object.__setattr__(self, "command", tuple(self.command))
        if not self.command:
            raise ValueError("nothing to schedule")


def schedule_commands(req: ScheduleRequest, program: str = "snowleopard") -> dict[str, str]:
    windows_cmd = subprocess.list2cmdline(req.command)
    posix_cmd = shlex.join(req.command)
    quoted = posix_cmd.replace("\\", "\\\\").replace('"', '\\"')
    return {
        "windows": f"at {req.at} {windows_cmd}",
        "posix": f'echo "{quoted}" | at {req.at}',
        "portable": f"{program} schedule --wait-until {req.at} -- {posix_cmd}",
    }


def seconds_until(at: str, now: datetime) -> float:
    """Seconds from ``now`` to the next occurrence of ``at`` (today or tomorrow)."""
    hour, minute = parse_time_of_day(at)
    target = now.replace(hour=hour, minute=minute, second=0, microsecond=0)
    if target <= now:
        target += timedelta(days=1)
    return (target - now).total_seconds()


def wait_until(
    at: str,
    command: Sequence[str],
    now: Callable[[], datetime] = datetime.now,
    sleep: Callable[[float], None] = time.sleep,
) -> int:
    sleep(seconds_until(at, now()))
    return subprocess.run(list(command)).returncode
