"""Combinatorial test-case reduction.

A :class:`ParameterSpec` lists named parameters and their candidate values.
From it this module can count the full cartesian product without
materializing it, enumerate that product, build a t-way covering set with a
deterministic In-Parameter-Order (IPOG) greedy construction, and check any
row set for complete t-way coverage.

:func:`min_size_bruteforce` is an exhaustive oracle for tiny specs; it exists
so the greedy generator can be measured against the true optimum.
"""

from __future__ import annotations

import csv
import io
import itertools
import math
import random
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field

__all__ = [
    "DEFAULT_ENUMERATION_CAP",
    "CoverageReport",
    "CoveringSet",
    "EnumerationCapError",
    "ParameterSpec",
    "SearchSpaceError",
    "SpecParseError",
    "TestRow",
    "count_all",
    "gen_all",
    "gen_tway",
    "min_size_bruteforce",
    "parse_param_spec",
    "read_rows_csv",
    "verify_coverage",
    "write_rows_csv",
]

DEFAULT_ENUMERATION_CAP = 1_000_000
DEFAULT_MAX_SUBSETS = 2_000_000

#: One full assignment, values listed in the spec's parameter order.
TestRow = tuple[str, ...]
#: One t-way interaction: ((param, value), ...) in spec parameter order.
Interaction = tuple[tuple[str, str], ...]


class SpecParseError(ValueError):
    """Raised for an unreadable parameter-spec file."""

    def __init__(self, message: str, lineno: int | None = None):
        self.lineno = lineno
        if lineno is not None:
            message = f"line {lineno}: {message}"
        super().__init__(message)


class EnumerationCapError(ValueError):
    """The full product is larger than the enumeration cap."""

    def __init__(self, count: int, cap: int):
        self.count = count
        self.cap = cap
        super().__init__(
            f"refusing to enumerate {count} combinations (cap is {cap})"
        )


class SearchSpaceError(ValueError):
    """The brute-force oracle was asked to search too many subsets."""


@dataclass(frozen=True)
class ParameterSpec:
    """Ordered parameters, each with an ordered list of values."""

    parameters: tuple[tuple[str, tuple[str, ...]], ...]

    def __post_init__(self):
        params = tuple((name, tuple(values)) for name, values in self.parameters)
        object.__setattr__(self, "parameters", params)
        seen = set()
        for name, values in params:
            if not name:
                raise ValueError("parameter name cannot be empty")
            if name in seen:
                raise ValueError(f"duplicate parameter {name!r}")
            seen.add(name)
            if not values:
                raise ValueError(f"parameter {name!r} has no values")
            if len(set(values)) != len(values):
                raise ValueError(f"parameter {name!r} has duplicate values")

    @classmethod
    def from_mapping(cls, mapping: Mapping[str, Sequence[str]]) -> ParameterSpec:
        return cls(tuple((name, tuple(values)) for name, values in mapping.items()))

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(name for name, _ in self.parameters)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(values) for _, values in self.parameters)

    def values(self, name: str) -> tuple[str, ...]:
        for pname, values in self.parameters:
            if pname == name:
                return values
        raise KeyError(name)

    def __len__(self) -> int:
        return len(self.parameters)


@dataclass(frozen=True)
class CoveringSet:
    """Rows claimed to cover every interaction of the given strength."""

    spec: ParameterSpec
    strength: int
    rows: tuple[TestRow, ...] = field(default_factory=tuple)

    def __post_init__(self):
        rows = tuple(tuple(row) for row in self.rows)
        object.__setattr__(self, "rows", rows)
        _check_strength(self.spec, self.strength)
        width = len(self.spec)
        for row in rows:
            if len(row) != width:
                raise ValueError(f"row {row!r} has {len(row)} values, expected {width}")
        if len(set(rows)) != len(rows):
            raise ValueError("covering set rows must be distinct")

    def __len__(self) -> int:
        return len(self.rows)

    def as_dicts(self) -> list[dict[str, str]]:
        names = self.spec.names
        return [dict(zip(names, row)) for row in self.rows]


@dataclass(frozen=True)
class CoverageReport:
    strength: int
    uncovered: tuple[Interaction, ...]

    @property
    def complete(self) -> bool:
        return not self.uncovered

    def __bool__(self) -> bool:
        return self.complete


def _check_strength(spec: ParameterSpec, strength: int) -> None:
    if not 1 <= strength <= len(spec):
        raise ValueError(
            f"strength must be between 1 and {len(spec)}, got {strength}"
        )


def parse_param_spec(text: str) -> ParameterSpec:
    """Parse ``name: v1, v2, ...`` lines; ``#`` starts a comment line."""
    params: list[tuple[str, tuple[str, ...]]] = []
    seen: set[str] = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        name, sep, rest = line.partition(":")
        name = name.strip()
        if not sep or not name:
            raise SpecParseError(f"expected 'name: values', got {raw!r}", lineno)
        if name in seen:
            raise SpecParseError(f"duplicate parameter {name!r}", lineno)
        if not rest.strip():
            raise SpecParseError(f"parameter {name!r} has no values", lineno)
        values = tuple(v.strip() for v in rest.split(","))
        if any(not v for v in values):
            raise SpecParseError(f"empty value in parameter {name!r}", lineno)
        if len(set(values)) != len(values):
            raise SpecParseError(f"duplicate value in parameter {name!r}", lineno)
        seen.add(name)
        params.append((name, values))
    if not params:
        raise SpecParseError("no parameters defined")
    return ParameterSpec(tuple(params))


def count_all(spec: ParameterSpec) -> int:
    return math.prod(spec.sizes)


def gen_all(spec: ParameterSpec, cap: int = DEFAULT_ENUMERATION_CAP) -> CoveringSet:
    """Every combination, varying the last parameter fastest."""
    total = count_all(spec)
    if total > cap:
        raise EnumerationCapError(total, cap)
    rows = tuple(itertools.product(*(values for _, values in spec.parameters)))
    return CoveringSet(spec, len(spec), rows)


def gen_tway(
    spec: ParameterSpec, strength: int, seed: int | None = None
) -> CoveringSet:
    """Greedy t-way covering set (IPOG).

    Parameters are processed largest-first. The first ``strength`` of them
    start as their full product; each further parameter is added to the
    existing rows choosing, per row, the value that covers the most
    uncovered interactions (horizontal growth), and whatever is still
    uncovered is then placed into rows with free slots or new rows (vertical
    growth). Free slots left at the end take the parameter's first value.

    Ties go to the earliest value. With ``seed`` set, ties are broken by a
    ``random.Random(seed)`` instead; the output is still reproducible.
    """
    _check_strength(spec, strength)
    rng = random.Random(seed) if seed is not None else None
    sizes = spec.sizes
    # stable sort: equal sizes keep spec order
    order = sorted(range(len(sizes)), key=lambda i: -sizes[i])
    isizes = [sizes[i] for i in order]
    t = strength

    rows: list[list[int | None]] = [
        list(combo) + [None] * (len(order) - t)
        for combo in itertools.product(*(range(n) for n in isizes[:t]))
    ]

    for k in range(t, len(order)):
        uncovered: dict[tuple[int, ...], set[tuple[int, ...]]] = {}
        for subset in itertools.combinations(range(k), t - 1):
            uncovered[subset] = {
                combo + (v,)
                for combo in itertools.product(*(range(isizes[j]) for j in subset))
                for v in range(isizes[k])
            }

        # horizontal growth
        for row in rows:
            gains = [0] * isizes[k]
            for subset, pending in uncovered.items():
                combo = tuple(row[j] for j in subset)
                if None in combo:
                    continue
                for v in range(isizes[k]):
                    if combo + (v,) in pending:
                        gains[v] += 1
            best = max(gains)
            if best == 0:
                continue
            tied = [v for v, g in enumerate(gains) if g == best]
            row[k] = rng.choice(tied) if rng is not None else tied[0]
            _mark_covered(row, k, uncovered)

        # vertical growth
        for subset in list(uncovered):
            for combo in sorted(uncovered[subset]):
                if combo not in uncovered[subset]:
                    continue
                cols = subset + (k,)
                target = None
                for row in rows:
                    if all(row[c] is None or row[c] == val for c, val in zip(cols, combo)):
                        target = row
                        break
                if target is None:
                    target = [None] * len(order)
                    rows.append(target)
                for c, val in zip(cols, combo):
                    target[c] = val
                _mark_covered(target, k, uncovered)

    out: list[TestRow] = []
    seen: set[TestRow] = set()
    for row in rows:
        filled = [0 if v is None else v for v in row]
        values: list[str] = [""] * len(order)
        for pos, orig in enumerate(order):
            values[orig] = spec.parameters[orig][1][filled[pos]]
        tup = tuple(values)
        if tup not in seen:
            seen.add(tup)
            out.append(tup)
    return CoveringSet(spec, strength, tuple(out))


def _mark_covered(row, k, uncovered) -> None:
    if row[k] is None:
        return
    for subset, pending in uncovered.items():
        combo = tuple(row[j] for j in subset)
        if None not in combo:
            pending.discard(combo + (row[k],))


def verify_coverage(cset: CoveringSet, strength: int | None = None) -> CoverageReport:
    """List every interaction of the given strength no row realizes."""
    spec = cset.spec
    t = cset.strength if strength is None else strength
    _check_strength(spec, t)
    for row in cset.rows:
        for (name, values), value in zip(spec.parameters, row):
            if value not in values:
                raise ValueError(f"row {row!r}: {value!r} is not a value of {name!r}")

    uncovered: list[Interaction] = []
    for subset in itertools.combinations(range(len(spec)), t):
        seen = {tuple(row[i] for i in subset) for row in cset.rows}
        names = [spec.parameters[i][0] for i in subset]
        for combo in itertools.product(*(spec.parameters[i][1] for i in subset)):
            if combo not in seen:
                uncovered.append(tuple(zip(names, combo)))
    return CoverageReport(t, tuple(uncovered))


def min_size_bruteforce(
    spec: ParameterSpec,
    strength: int,
    cap: int,
    max_subsets: int = DEFAULT_MAX_SUBSETS,
) -> int | None:
    """Smallest number of full-product rows giving complete coverage.

    Returns ``None`` when no subset of at most ``cap`` rows suffices. Raises
    :class:`SearchSpaceError` rather than start a search over more than
    ``max_subsets`` candidate subsets.
    """
    _check_strength(spec, strength)
    total = count_all(spec)
    cap = min(cap, total)
    work = sum(math.comb(total, k) for k in range(1, cap + 1))
    if work > max_subsets:
        raise SearchSpaceError(
            f"{work} subsets of {total} rows exceed the limit of {max_subsets}"
        )

    rows = list(itertools.product(*(range(n) for n in spec.sizes)))
    index: dict[tuple, int] = {}
    masks = []
    for row in rows:
        mask = 0
        for subset in itertools.combinations(range(len(spec)), strength):
            key = (subset, tuple(row[i] for i in subset))
            bit = index.setdefault(key, len(index))
            mask |= 1 << bit
        masks.append(mask)
    full = (1 << len(index)) - 1

    for k in range(1, cap + 1):
        for chosen in itertools.combinations(masks, k):
            acc = 0
            for m in chosen:
                acc |= m
            if acc == full:
                return k
    return None


def write_rows_csv(cset: CoveringSet) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(cset.spec.names)
    writer.writerows(cset.rows)
    return buf.getvalue()


def read_rows_csv(text: str, spec: ParameterSpec, strength: int) -> CoveringSet:
    """Load rows written by :func:`write_rows_csv` (columns may be reordered)."""
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("rows file is empty") from None
    if sorted(header) != sorted(spec.names) or len(set(header)) != len(header):
        raise ValueError(
            f"header {header!r} does not match parameters {list(spec.names)!r}"
        )
    pos = [header.index(name) for name in spec.names]
    rows: list[TestRow] = []
    for lineno, record in enumerate(reader, start=2):
        if not record:
            continue
        if len(record) != len(header):
            raise ValueError(f"line {lineno}: expected {len(header)} fields")
        rows.append(tuple(record[p] for p in pos))
    return CoveringSet(spec, strength, tuple(rows))


def interactions_as_text(uncovered: Iterable[Interaction]) -> list[str]:
    return [", ".join(f"{n}={v}" for n, v in item) for item in uncovered]
