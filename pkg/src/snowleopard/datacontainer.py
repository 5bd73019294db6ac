"""XML test-data container.

The container is a ``<tcs>`` document with one ``<tc name="...">`` element per
test case. Parsing folds it into a nested map keyed by case id::

    <tcs>
      <tc name="tc1" playername="man1" freq="50 or 25"/>
    </tcs>

becomes ``{"tc1": {"playername": "man1", "freq": "50 or 25"}}``.

Attributes and child elements both become keys. Text inside a leaf element
is stored under ``_text``, and repeated child elements of the same name are
collected into a list in document order.
"""

from __future__ import annotations

import warnings
import xml.etree.ElementTree as ET
from collections.abc import Mapping
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Union

__all__ = [
    "EXPECTED_SUFFIX",
    "MAX_RECOMMENDED_DEPTH",
    "TEXT_KEY",
    "CaseNotFoundError",
    "ContainerError",
    "DeepNestingWarning",
    "ExpectedValue",
    "TestDataMap",
    "expected_value",
    "load_container",
    "lookup_case_data",
    "parse_container",
]

TEXT_KEY = "_text"
EXPECTED_SUFFIX = "_expected"
MAX_RECOMMENDED_DEPTH = 3

DataValue = Union[str, "ParamMap", list]
ParamMap = dict[str, Any]


class ContainerError(ValueError):
    """The XML document is not a valid data container."""


class CaseNotFoundError(LookupError):
    def __init__(self, case_id: str):
        self.case_id = case_id
        super().__init__(f"no test data for case {case_id!r}")


class DeepNestingWarning(UserWarning):
    pass


@dataclass(frozen=True)
class TestDataMap:
    """Per-case parameter maps keyed by test-case id."""

    __test__ = False  # not a pytest class

    cases: Mapping[str, ParamMap]

    def __contains__(self, case_id: object) -> bool:
        return case_id in self.cases

    def __len__(self) -> int:
        return len(self.cases)

    def __iter__(self):
        return iter(self.cases)

    def as_nested(self) -> dict[str, dict[str, ParamMap]]:
        """The whole document as one map, ``{"tc": {case_id: params}}``."""
        return {"tc": {cid: params for cid, params in self.cases.items()}}


@dataclass(frozen=True)
class ExpectedValue:
    parameter: str
    configured: str
    expected: str


def _fold(elem: ET.Element, depth: int, where: str) -> ParamMap:
    if depth > MAX_RECOMMENDED_DEPTH:
        warnings.warn(
            f"{where}: element <{elem.tag}> nested {depth} levels deep "
            f"(recommended maximum is {MAX_RECOMMENDED_DEPTH})",
            DeepNestingWarning,
            stacklevel=4,
        )
    out: ParamMap = dict(elem.attrib)
    children = list(elem)
    for child in children:
        value = _fold(child, depth + 1, where)
        key = child.tag
        if key in elem.attrib:
            raise ContainerError(
                f"{where}: <{key}> clashes with an attribute of the same name"
            )
        if key in out:
            existing = out[key]
            if isinstance(existing, list):
                existing.append(value)
            else:
                out[key] = [existing, value]
        else:
            out[key] = value
    text = (elem.text or "").strip()
    if text and not children:
        if TEXT_KEY in out:
            raise ContainerError(f"{where}: attribute {TEXT_KEY!r} is reserved")
        out[TEXT_KEY] = text
    return out


def parse_container(xml_text: str) -> TestDataMap:
    try:
        root = ET.fromstring(xml_text)
    except ET.ParseError as exc:
        raise ContainerError(f"malformed XML: {exc}") from None
    if root.tag != "tcs":
        raise ContainerError(f"root element must be <tcs>, got <{root.tag}>")

    cases: dict[str, ParamMap] = {}
    for position, tc in enumerate(root, start=1):
        if tc.tag != "tc":
            raise ContainerError(f"unexpected <{tc.tag}> under <tcs> (element {position})")
        case_id = tc.attrib.get("name")
        if not case_id:
            raise ContainerError(f"<tc> element {position} has no name attribute")
        if case_id in cases:
            raise ContainerError(f"duplicate test case {case_id!r}")
        params = _fold(tc, 2, case_id)
        del params["name"]
        cases[case_id] = params
    return TestDataMap(cases)


def load_container(path: str | Path) -> TestDataMap:
    return parse_container(Path(path).read_text(encoding="utf-8"))


def lookup_case_data(data: TestDataMap, case_id: str) -> ParamMap:
    """Parameters for ``case_id``.

    An exact id match wins; otherwise a single case-insensitive match is
    accepted, so suite id ``TC1`` finds container entry ``tc1``.
    """
    if case_id in data.cases:
        return data.cases[case_id]
    folded = [cid for cid in data.cases if cid.casefold() == case_id.casefold()]
    if len(folded) == 1:
        return data.cases[folded[0]]
    raise CaseNotFoundError(case_id)


def expected_value(param_map: Mapping[str, Any], parameter: str) -> ExpectedValue:
    """Configured value of ``parameter`` and what the back end should report.

    A sibling ``<parameter>_expected`` entry overrides the expectation;
    otherwise the configured value is expected verbatim.
    """
    if parameter not in param_map:
        raise KeyError(f"parameter {parameter!r} not in test data")
    configured = param_map[parameter]
    expected = param_map.get(parameter + EXPECTED_SUFFIX, configured)
    if not isinstance(configured, str) or not isinstance(expected, str):
        raise TypeError(f"parameter {parameter!r} is not a scalar value")
    return ExpectedValue(parameter, configured, expected)


def configurable_parameters(param_map: Mapping[str, Any]) -> list[str]:
    """Scalar keys that are set on the application (overrides excluded)."""
    return [
        key
        for key, value in param_map.items()
        if isinstance(value, str)
        and not key.endswith(EXPECTED_SUFFIX)
        and key != TEXT_KEY
    ]
