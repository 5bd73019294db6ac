"""Test-case definitions and the reusable library layer.

A test case is four phases, ``setup``, ``steps``, ``validation`` and
``cleanup``, each called as ``phase(params, driver, log)``. A phase fails by
raising :class:`AssertionError` (or returning ``False``); any other exception
is treated as a crash.

Library methods take a single keyword map rather than positional arguments,
so a method can grow new optional keywords without touching existing
callers::

    lib = MethodRegistry("player")

    @lib.method(required=["name"], defaults={"freq": "50"})
    def addPlayer(args):
        return Player(args["name"], args["freq"])

    lib.invoke("addPlayer", {"name": "man1"})
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field
from typing import Any

from .datacontainer import configurable_parameters
from .drivers import CONFIG_PAGE, Action, dump_config, validate_config

__all__ = [
    "MAX_INHERITANCE_DEPTH",
    "CaseRegistry",
    "DuplicateCaseError",
    "InheritanceDepthError",
    "MethodError",
    "MethodRegistry",
    "MethodSpec",
    "Phase",
    "TestCaseDefinition",
    "class_inheritance_depth",
    "data_driven_case",
]

MAX_INHERITANCE_DEPTH = 3

Phase = Callable[[Mapping[str, Any], Any, Any], Any]
PHASES = ("setup", "steps", "validation", "cleanup")


def _noop(params, driver, log):
    return None


@dataclass(frozen=True)
class TestCaseDefinition:
    __test__ = False

    case_id: str
    setup: Phase = _noop
    steps: Phase = _noop
    validation: Phase = _noop
    cleanup: Phase = _noop

    def __post_init__(self):
        if not self.case_id:
            raise ValueError("case_id cannot be empty")
        for name in PHASES:
            if not callable(getattr(self, name)):
                raise TypeError(f"{self.case_id}: phase {name!r} is not callable")

    def phase(self, name: str) -> Phase:
        return getattr(self, name)


class DuplicateCaseError(ValueError):
    pass


class CaseRegistry:
    """Registered test cases, looked up by id.

    ``fallback`` builds a definition for ids that were never registered; the
    generic data-driven case uses it so any id present in the data container
    can run without a hand-written script.
    """

    def __init__(self, fallback: Callable[[str], TestCaseDefinition] | None = None):
        self._cases: dict[str, TestCaseDefinition] = {}
        self.fallback = fallback

    def register(self, defn: TestCaseDefinition) -> TestCaseDefinition:
        if defn.case_id in self._cases:
            raise DuplicateCaseError(f"case {defn.case_id!r} already registered")
        self._cases[defn.case_id] = defn
        return defn

    def case(self, case_id: str) -> Callable[[type], type]:
        """Class decorator registering a class with phase methods."""

        def deco(cls: type) -> type:
            obj = cls()
            phases = {name: getattr(obj, name) for name in PHASES if hasattr(obj, name)}
            self.register(TestCaseDefinition(case_id, **phases))
            return cls

        return deco

    def get(self, case_id: str) -> TestCaseDefinition:
        try:
            return self._cases[case_id]
        except KeyError:
            if self.fallback is not None:
                return self.fallback(case_id)
            raise KeyError(f"no test case registered as {case_id!r}") from None

    def __contains__(self, case_id: object) -> bool:
        return case_id in self._cases

    def ids(self) -> list[str]:
        return list(self._cases)

    def __len__(self) -> int:
        return len(self._cases)


class MethodError(TypeError):
    pass


class InheritanceDepthError(ValueError):
    pass


_REQUIRED = object()


@dataclass(frozen=True)
class MethodSpec:
    name: str
    func: Callable[[dict[str, Any]], Any]
    keywords: Mapping[str, Any] = field(default_factory=dict)

    @property
    def required(self) -> list[str]:
        return [k for k, v in self.keywords.items() if v is _REQUIRED]

    def complete(self, args: Mapping[str, Any], strict: bool = True) -> dict[str, Any]:
        unknown = [k for k in args if k not in self.keywords]
        if unknown and strict:
            raise MethodError(f"{self.name}: unknown keyword(s) {', '.join(map(repr, unknown))}")
        missing = [k for k in self.required if k not in args]
        if missing:
            raise MethodError(f"{self.name}: missing required keyword(s) {', '.join(map(repr, missing))}")
        done = {k: v for k, v in self.keywords.items() if v is not _REQUIRED}
        done.update((k, v) for k, v in args.items() if k in self.keywords)
        return done


class MethodRegistry:
    """Library methods for one area of functionality.

    A registry may extend a ``parent``; lookups fall through to it. Chains
    are limited to :data:`MAX_INHERITANCE_DEPTH` registries
    (grandparent, parent, child).
    """

    def __init__(self, name: str, parent: MethodRegistry | None = None):
        self.name = name
        self.parent = parent
        if self.depth > MAX_INHERITANCE_DEPTH:
            raise InheritanceDepthError(
                f"{name}: chain {' -> '.join(self.chain())} is deeper than "
                f"{MAX_INHERITANCE_DEPTH}"
            )
        self._methods: dict[str, MethodSpec] = {}

    @property
    def depth(self) -> int:
        return len(self.chain())

    def chain(self) -> list[str]:
        names = []
        reg: MethodRegistry | None = self
        while reg is not None:
            names.append(reg.name)
            reg = reg.parent
        return names[::-1]

    def register(
        self,
        name: str,
        func: Callable[[dict[str, Any]], Any],
        required: Iterable[str] = (),
        defaults: Mapping[str, Any] | None = None,
    ) -> MethodSpec:
        keywords: dict[str, Any] = {k: _REQUIRED for k in required}
        for k, v in (defaults or {}).items():
            if k in keywords:
                raise MethodError(f"{name}: keyword {k!r} is both required and defaulted")
            keywords[k] = v
        spec = MethodSpec(name, func, keywords)
        self._methods[name] = spec
        return spec

    def method(self, required: Iterable[str] = (), defaults: Mapping[str, Any] | None = None,
               name: str | None = None):
        def deco(func):
            self.register(name or func.__name__, func, required, defaults)
            return func

        return deco

    def resolve(self, name: str) -> MethodSpec:
        reg: MethodRegistry | None = self
        while reg is not None:
            if name in reg._methods:
                return reg._methods[name]
            reg = reg.parent
        raise MethodError(f"{self.name}: unknown method {name!r}")

    def invoke(self, name: str, args: Mapping[str, Any] | None = None, strict: bool = True) -> Any:
        spec = self.resolve(name)
        return spec.func(spec.complete(args or {}, strict=strict))


def class_inheritance_depth(cls: type) -> int:
    """Length of the longest chain of user classes from ``cls`` to ``object``."""
    bases = [b for b in cls.__bases__ if b is not object]
    if not bases:
        return 1
    return 1 + max(class_inheritance_depth(b) for b in bases)


def data_driven_case(case_id: str, page: str = CONFIG_PAGE) -> TestCaseDefinition:
    """Generic case: set every parameter from the test data, then check the
    back-end configuration dump against it.

    The driver must also be the back end that :func:`dump_config` queries,
    as :class:`~snowleopard.drivers.MockWebApp` is.
    """

    def setup(params, driver, log):
        log.info(f"Loaded test data for {case_id}: {len(params)} entries")

    def steps(params, driver, log):
        driver.open_page(page)
        log.info(f"Loaded {page} Page...")
        for key in configurable_parameters(params):
            driver.perform_action(Action.SET_VALUE, key, params[key])
            log.info(f"Configured {key}={params[key]}")

    def validation(params, driver, log):
        keys = configurable_parameters(params)
        outcome = validate_config(dump_config(driver, keys), params, keys)
        for m in outcome.mismatches:
            log.failed(f"{m.key}: expected {m.expected!r}, got {m.actual!r}")
        assert outcome.passed, f"{len(outcome.mismatches)} configuration mismatch(es)"
        log.info(f"Validated {len(keys)} parameter(s)")

    def cleanup(params, driver, log):
        driver.reset()
        log.info("Configuration removed")

    return TestCaseDefinition(case_id, setup, steps, validation, cleanup)
