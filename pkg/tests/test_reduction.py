from __future__ import annotations

import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from snowleopard.reduction import (
    CoveringSet,
    EnumerationCapError,
    ParameterSpec,
    SearchSpaceError,
    SpecParseError,
    count_all,
    gen_all,
    gen_tway,
    min_size_bruteforce,
    parse_param_spec,
    read_rows_csv,
    verify_coverage,
    write_rows_csv,
)


def spec_of(*sizes: int) -> ParameterSpec:
    return ParameterSpec.from_mapping(
        {f"p{i}": [f"v{j}" for j in range(n)] for i, n in enumerate(sizes)}
    )


# -- independent oracles: plain sets and itertools, nothing shared with the module

def naive_uncovered(spec: ParameterSpec, rows, t: int) -> set:
    names = spec.names
    needed = set()
    for subset in itertools.combinations(range(len(names)), t):
        for combo in itertools.product(*(spec.parameters[i][1] for i in subset)):
            needed.add((subset, combo))
    got = set()
    for row in rows:
        for subset in itertools.combinations(range(len(names)), t):
            got.add((subset, tuple(row[i] for i in subset)))
    return needed - got


def naive_minimum(spec: ParameterSpec, t: int) -> int:
    full = list(itertools.product(*(v for _, v in spec.parameters)))
    for k in range(1, len(full) + 1):
        for subset in itertools.combinations(full, k):
            if not naive_uncovered(spec, subset, t):
                return k
    raise AssertionError("unreachable: the full product always covers")


class TestParseParamSpec:
    def test_documented_names(self):
        spec = parse_param_spec("player: man1, man2\nfreq: 29.97, 50")
        assert spec.names == ("player", "freq")
        assert spec.values("player") == ("man1", "man2")
        assert spec.values("freq") == ("29.97", "50")

    def test_minimal(self):
        spec = parse_param_spec("a: x")
        assert spec.parameters == (("a", ("x",)),)

    def test_comments_and_blank_lines(self):
        spec = parse_param_spec("# header\n\na: 1, 2\n  # indented comment\nb: z\n")
        assert spec.names == ("a", "b")

    def test_duplicate_value(self):
        with pytest.raises(SpecParseError, match="duplicate value"):
            parse_param_spec("a: x, x")

    def test_duplicate_parameter_names_line(self):
        with pytest.raises(SpecParseError, match="line 2") as exc:
            parse_param_spec("a: 1\na: 2")
        assert exc.value.lineno == 2

    @pytest.mark.parametrize("text,lineno", [("a: 1\nno colon here", 2), ("a:", 1), ("a: 1,,2", 1), (": 1", 1)])
    def test_malformed(self, text, lineno):
        with pytest.raises(SpecParseError) as exc:
            parse_param_spec(text)
        assert exc.value.lineno == lineno

    def test_empty_file(self):
        with pytest.raises(SpecParseError):
            parse_param_spec("# nothing\n")


class TestParameterSpec:
    def test_rejects_empty_values(self):
        with pytest.raises(ValueError):
            ParameterSpec((("a", ()),))

    def test_rejects_duplicate_names(self):
        with pytest.raises(ValueError):
            ParameterSpec((("a", ("1",)), ("a", ("2",))))

    def test_rejects_empty_name(self):
        with pytest.raises(ValueError):
            ParameterSpec((("", ("1",)),))


class TestCountAll:
    def test_ten_by_26_count(self):
        assert count_all(spec_of(*[26] * 10)) == 141_167_095_653_376

    def test_trivial(self):
        assert count_all(spec_of(1)) == 1
        assert count_all(spec_of(2, 3, 4)) == 24

    def test_beyond_64_bits(self):
        assert count_all(spec_of(*[26] * 20)) == 26**20 > 2**64


class TestGenAll:
    def test_lexicographic(self):
        cset = gen_all(spec_of(2, 2))
        assert cset.rows == (("v0", "v0"), ("v0", "v1"), ("v1", "v0"), ("v1", "v1"))

    def test_single_value_param(self):
        spec = ParameterSpec.from_mapping({"A": ["1", "2"], "B": ["x"]})
        assert gen_all(spec).rows == (("1", "x"), ("2", "x"))

    def test_three_binary(self):
        cset = gen_all(spec_of(2, 2, 2))
        assert len(cset) == 8
        assert cset.strength == 3

    def test_cap(self):
        with pytest.raises(EnumerationCapError) as exc:
            gen_all(spec_of(*[26] * 10))
        assert exc.value.count == 141_167_095_653_376
        assert "141167095653376" in str(exc.value)

    def test_custom_cap(self):
        with pytest.raises(EnumerationCapError):
            gen_all(spec_of(3, 3), cap=8)
        assert len(gen_all(spec_of(3, 3), cap=9)) == 9


class TestGenTway:
    @pytest.mark.parametrize("sizes", [(2, 2), (3, 5), (4, 1), (6, 2)])
    def test_two_params_forces_full_product(self, sizes):
        spec = spec_of(*sizes)
        assert set(gen_tway(spec, 2).rows) == set(gen_all(spec).rows)

    def test_three_binary_pairwise(self):
        cset = gen_tway(spec_of(2, 2, 2), 2)
        assert not naive_uncovered(cset.spec, cset.rows, 2)
        assert len(cset) <= 6

    def test_ten_by_26_pairwise(self):
        spec = spec_of(*[26] * 10)
        cset = gen_tway(spec, 2)
        assert verify_coverage(cset, 2).complete
        assert len(cset) >= 676
        assert len(cset) <= count_all(spec)

    @pytest.mark.parametrize("t", [0, 4])
    def test_strength_out_of_range(self, t):
        with pytest.raises(ValueError):
            gen_tway(spec_of(2, 2, 2), t)

    def test_full_strength_is_full_product(self):
        spec = spec_of(2, 3, 2)
        cset = gen_tway(spec, 3)
        assert len(cset) == count_all(spec)
        assert set(cset.rows) == set(gen_all(spec).rows)

    def test_rows_in_spec_parameter_order(self):
        # largest parameter is processed first internally; output order must not change
        spec = ParameterSpec.from_mapping({"small": ["a", "b"], "big": ["1", "2", "3", "4"]})
        for row in gen_tway(spec, 2).rows:
            assert row[0] in ("a", "b") and row[1] in ("1", "2", "3", "4")

    def test_deterministic(self):
        spec = spec_of(3, 4, 2, 5, 3)
        assert gen_tway(spec, 2).rows == gen_tway(spec, 2).rows

    def test_seeded_deterministic_and_complete(self):
        spec = spec_of(3, 4, 2, 5, 3)
        a = gen_tway(spec, 2, seed=7)
        assert a.rows == gen_tway(spec, 2, seed=7).rows
        assert verify_coverage(a).complete

    def test_three_way(self):
        cset = gen_tway(spec_of(2, 3, 2, 2, 3), 3)
        assert not naive_uncovered(cset.spec, cset.rows, 3)


class TestVerifyCoverage:
    def test_full_product_complete_at_every_strength(self):
        spec = spec_of(2, 3, 2)
        full = gen_all(spec)
        for t in (1, 2, 3):
            assert verify_coverage(full, t).complete

    def test_empty_rows_t1(self):
        spec = spec_of(2, 3)
        report = verify_coverage(CoveringSet(spec, 1, ()), 1)
        assert not report.complete
        assert set(report.uncovered) == {
            (("p0", "v0"),), (("p0", "v1"),),
            (("p1", "v0"),), (("p1", "v1"),), (("p1", "v2"),),
        }

    def test_minimal_array_minus_any_row(self):
        spec = spec_of(2, 2, 2)
        full = list(gen_all(spec).rows)
        minimal = next(
            subset for subset in itertools.combinations(full, 4)
            if not naive_uncovered(spec, subset, 2)
        )
        for i in range(4):
            reduced = minimal[:i] + minimal[i + 1:]
            assert not verify_coverage(CoveringSet(spec, 2, reduced), 2).complete

    def test_matches_naive_oracle(self):
        rng = random.Random(3)
        spec = spec_of(3, 2, 3, 2)
        full = list(gen_all(spec).rows)
        for _ in range(30):
            rows = rng.sample(full, rng.randint(0, len(full)))
            report = verify_coverage(CoveringSet(spec, 2, rows), 2)
            assert len(report.uncovered) == len(naive_uncovered(spec, rows, 2))

    def test_foreign_value_rejected(self):
        spec = spec_of(2, 2)
        with pytest.raises(ValueError, match="not a value"):
            verify_coverage(CoveringSet(spec, 2, [("v0", "nope")]), 2)

    def test_strength_above_params(self):
        with pytest.raises(ValueError):
            verify_coverage(CoveringSet(spec_of(2, 2), 2, []), 3)

    def test_uncovered_listing_after_removal(self):
        spec = spec_of(2, 2)
        rows = gen_all(spec).rows[1:]
        report = verify_coverage(CoveringSet(spec, 2, rows), 2)
        assert report.uncovered == ((("p0", "v0"), ("p1", "v0")),)


class TestCoveringSet:
    def test_duplicate_rows_rejected(self):
        with pytest.raises(ValueError, match="distinct"):
            CoveringSet(spec_of(2), 1, [("v0",), ("v0",)])

    def test_wrong_width(self):
        with pytest.raises(ValueError):
            CoveringSet(spec_of(2, 2), 1, [("v0",)])


class TestMinSizeBruteforce:
    def test_three_binary(self):
        assert naive_minimum(spec_of(2, 2, 2), 2) == 4
        assert min_size_bruteforce(spec_of(2, 2, 2), 2, cap=8) == 4

    def test_two_by_two(self):
        assert min_size_bruteforce(spec_of(2, 2), 2, cap=4) == 4

    @pytest.mark.parametrize("sizes", [(2, 3), (3, 1, 2), (2, 2, 2), (4, 2)])
    def test_strength_one_is_largest_parameter(self, sizes):
        spec = spec_of(*sizes)
        assert naive_minimum(spec, 1) == max(sizes)
        assert min_size_bruteforce(spec, 1, cap=count_all(spec)) == max(sizes)

    @pytest.mark.parametrize("sizes,t", [((2, 3, 2), 2), ((3, 3), 1), ((2, 2, 2, 2), 2)])
    def test_agrees_with_naive(self, sizes, t):
        spec = spec_of(*sizes)
        assert min_size_bruteforce(spec, t, cap=count_all(spec)) == naive_minimum(spec, t)

    def test_not_found_within_cap(self):
        assert min_size_bruteforce(spec_of(2, 2, 2), 2, cap=3) is None

    def test_guard(self):
        with pytest.raises(SearchSpaceError):
            min_size_bruteforce(spec_of(2, 2, 2, 2, 2), 2, cap=32)


class TestCsv:
    def test_round_trip(self):
        spec = spec_of(3, 2, 2)
        cset = gen_tway(spec, 2)
        again = read_rows_csv(write_rows_csv(cset), spec, 2)
        assert again.rows == cset.rows

    def test_header_and_quoting(self):
        spec = ParameterSpec.from_mapping({"freq": ["50 or 25", "29.97"], "label": ["a,b"]})
        text = write_rows_csv(gen_all(spec))
        assert text.splitlines()[0] == "freq,label"
        assert text.splitlines()[1] == '50 or 25,"a,b"'

    def test_reordered_columns(self):
        spec = spec_of(2, 2)
        text = "p1,p0\nv1,v0\n"
        assert read_rows_csv(text, spec, 1).rows == (("v0", "v1"),)

    def test_bad_header(self):
        with pytest.raises(ValueError):
            read_rows_csv("x,y\n", spec_of(2, 2), 1)


# -- properties -------------------------------------------------------------

sizes_strategy = st.lists(st.integers(1, 4), min_size=1, max_size=5)


@settings(max_examples=60, deadline=None)
@given(sizes=sizes_strategy, data=st.data())
def test_generated_sets_always_cover(sizes, data):
    spec = spec_of(*sizes)
    t = data.draw(st.integers(1, len(sizes)))
    cset = gen_tway(spec, t)
    assert not naive_uncovered(spec, cset.rows, t)
    assert len(cset) <= count_all(spec)
    if t == len(sizes):
        assert len(cset) == count_all(spec)


@settings(max_examples=40, deadline=None)
@given(sizes=sizes_strategy)
def test_gen_all_distinct_and_counted(sizes):
    cset = gen_all(spec_of(*sizes))
    assert len(set(cset.rows)) == len(cset) == count_all(cset.spec)


@settings(max_examples=40, deadline=None)
@given(sizes=st.lists(st.integers(1, 3), min_size=2, max_size=4), seed=st.integers(0, 10**6))
def test_coverage_is_monotone(sizes, seed):
    spec = spec_of(*sizes)
    cset = gen_tway(spec, 2)
    extra = [r for r in gen_all(spec).rows if r not in set(cset.rows)]
    random.Random(seed).shuffle(extra)
    bigger = CoveringSet(spec, 2, cset.rows + tuple(extra[:3]))
    assert verify_coverage(bigger, 2).complete


@settings(max_examples=30, deadline=None)
@given(sizes=sizes_strategy, seed=st.integers(0, 1000))
def test_same_seed_same_csv(sizes, seed):
    spec = spec_of(*sizes)
    t = min(2, len(sizes))
    assert write_rows_csv(gen_tway(spec, t, seed)) == write_rows_csv(gen_tway(spec, t, seed))
