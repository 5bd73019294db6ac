"""Application-under-test drivers and the server-side validation utility.

:class:`DriverHandle` is the seam where a real browser driver would plug in.
:class:`MockWebApp` is an in-memory stand-in with page/element validation,
an optional page-load delay and fault injection (fail or hang on a chosen
action), which is what the harness crash and timeout handling is tested
against.
"""

from __future__ import annotations

import abc
import copy
import enum
import threading
import time
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

from .datacontainer import TestDataMap, configurable_parameters, expected_value

__all__ = [
    "Action",
    "ActionRecord",
    "ConfigDump",
    "DriverCrash",
    "DriverHandle",
    "ElementNotFound",
    "Fault",
    "FaultKind",
    "Mismatch",
    "MockWebApp",
    "PageHandle",
    "PageValidationError",
    "ValidationError",
    "ValidationOutcome",
    "CONFIG_PAGE",
    "dump_config",
    "mock_app_for_data",
    "parse_config_dump",
    "validate_config",
]


CONFIG_PAGE = "Config"


class PageValidationError(AssertionError):
    """The page requested does not exist (a test failure, not a crash)."""


class ElementNotFound(AssertionError):
    pass


class DriverCrash(RuntimeError):
    """Abnormal driver termination."""


class ValidationError(KeyError):
    """A key to validate has no entry in the test data."""


class Action(str, enum.Enum):
    CLICK = "click"
    SET_VALUE = "set_value"


class FaultKind(str, enum.Enum):
    FAIL = "fail"
    HANG = "hang"


@dataclass(frozen=True)
class Fault:
    """Fault triggered by the first matching driver call.

    ``action`` is ``"open_page"``, ``"click"`` or ``"set_value"``; ``None``
    matches any of them. ``target`` narrows it to one page or element.
    """

    kind: FaultKind
    action: str | None = None
    target: str | None = None

    def matches(self, action: str, target: str) -> bool:
        return (self.action is None or self.action == action) and (
            self.target is None or self.target == target
        )


@dataclass(frozen=True)
class ActionRecord:
    call: str
    target: str | None = None
    value: str | None = None


@dataclass(frozen=True)
class PageHandle:
    page_id: str
    elements: frozenset[str]


class DriverHandle(abc.ABC):
    @abc.abstractmethod
    def open_page(self, page_id: str) -> PageHandle: ...

    @abc.abstractmethod
    def perform_action(
        self, action: Action | str, target: str, value: str | None = None
    ) -> None: ...

    @abc.abstractmethod
    def read_state(self, key: str) -> str | None: ...

    @abc.abstractmethod
    def reset(self) -> None: ...


class MockWebApp(DriverHandle):
    """In-memory web application.

    ``pages`` maps page id to the element ids on it. ``display`` optionally
    maps a key to a format string used when the back end reports its value
    (``{"freq": "{} Hz"}``), for applications whose back end shows a value
    differently from how it was entered.

    Every driver call, ``reset`` included, appends one :class:`ActionRecord`.
    """

    def __init__(
        self,
        pages: Mapping[str, Iterable[str]],
        initial_state: Mapping[str, str] | None = None,
        page_load_delay: float = 0.0,
        fault: Fault | None = None,
        display: Mapping[str, str] | None = None,
    ):
        self.pages = {pid: frozenset(elements) for pid, elements in pages.items()}
        self.initial_state = dict(initial_state or {})
        self.state: dict[str, str] = dict(self.initial_state)
        self.page_load_delay = page_load_delay
        self.fault = fault
        self.display = dict(display or {})
        self.action_log: list[ActionRecord] = []
        self.current_page: str | None = None
        self._release = threading.Event()

    def inject_fault(self, kind: FaultKind | str, action: str | None = None,
                     target: str | None = None) -> None:
        self.fault = Fault(FaultKind(kind), action, target)

    def _maybe_fault(self, action: str, target: str) -> None:
        fault = self.fault
        if fault is None or not fault.matches(action, target):
            return
        self.fault = None
        if fault.kind is FaultKind.FAIL:
            raise DriverCrash(f"injected failure on {action} {target!r}")
        # blocks until reset() releases it, then dies rather than continue
        self._release.wait()
        raise DriverCrash(f"hung {action} {target!r} released by reset")

    def open_page(self, page_id: str) -> PageHandle:
        self.action_log.append(ActionRecord("open_page", page_id))
        self._maybe_fault("open_page", page_id)
        if page_id not in self.pages:
            raise PageValidationError(f"page {page_id!r} does not exist")
        if self.page_load_delay:
            time.sleep(self.page_load_delay)
        self.current_page = page_id
        return PageHandle(page_id, self.pages[page_id])

    def perform_action(
        self, action: Action | str, target: str, value: str | None = None
    ) -> None:
        action = Action(action)
        self.action_log.append(ActionRecord(action.value, target, value))
        self._maybe_fault(action.value, target)
        if self.current_page is None:
            raise PageValidationError("no page open")
        if target not in self.pages[self.current_page]:
            raise ElementNotFound(
                f"element {target!r} not on page {self.current_page!r}"
            )
        if action is Action.SET_VALUE:
            if value is None:
                raise ValueError("set_value needs a value")
            self.state[target] = value

    def read_state(self, key: str) -> str | None:
        self.action_log.append(ActionRecord("read_state", key))
        return self.state.get(key)

    def reset(self) -> None:
        self.action_log.append(ActionRecord("reset"))
        self._release.set()
        self._release = threading.Event()
        self.state = dict(self.initial_state)
        self.current_page = None

    def backend_value(self, key: str) -> str | None:
        value = self.state.get(key)
        if value is None:
            return None
        fmt = self.display.get(key)
        return fmt.format(value) if fmt else value

    def snapshot(self) -> dict[str, Any]:
        return copy.deepcopy({"state": self.state, "current_page": self.current_page})


@dataclass(frozen=True)
class ConfigDump:
    """``key=value`` lines from the server-side query utility."""

    entries: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        keys = [k for k, _ in self.entries]
        if len(set(keys)) != len(keys):
            raise ValueError("duplicate key in config dump")

    def as_dict(self) -> dict[str, str]:
        return dict(self.entries)

    def to_text(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in self.entries)

    def write(self, path: str | Path) -> Path:
        path = Path(path)
        path.write_bytes(self.to_text().encode("utf-8"))
        return path


def parse_config_dump(text: str) -> ConfigDump:
    entries = []
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep or not key:
            raise ValueError(f"line {lineno}: expected key=value, got {line!r}")
        entries.append((key, value))
    return ConfigDump(tuple(entries))


def dump_config(app: MockWebApp, keys: Iterable[str]) -> ConfigDump:
    """Query the back end for ``keys``, in order; unknown keys come back empty."""
    return ConfigDump(tuple((k, app.backend_value(k) or "") for k in keys))


@dataclass(frozen=True)
class Mismatch:
    key: str
    expected: str
    actual: str


@dataclass(frozen=True)
class ValidationOutcome:
    mismatches: tuple[Mismatch, ...] = field(default_factory=tuple)

    @property
    def passed(self) -> bool:
        return not self.mismatches

    def __bool__(self) -> bool:
        return self.passed


def validate_config(
    dump: ConfigDump, param_map: Mapping[str, Any], keys: Iterable[str]
) -> ValidationOutcome:
    actual = dump.as_dict()
    mismatches = []
    for key in keys:
        try:
            want = expected_value(param_map, key).expected
        except KeyError:
            raise ValidationError(f"key {key!r} has no test data to validate against") from None
        got = actual.get(key, "")
        if got != want:
            mismatches.append(Mismatch(key, want, got))
    return ValidationOutcome(tuple(mismatches))


def mock_app_for_data(data: TestDataMap, page: str = CONFIG_PAGE, **kwargs) -> MockWebApp:
    """Mock app with one page holding every parameter any case configures."""
    elements: dict[str, None] = {}
    for params in data.cases.values():
        elements.update(dict.fromkeys(configurable_parameters(params)))
    return MockWebApp({page: elements}, **kwargs)
