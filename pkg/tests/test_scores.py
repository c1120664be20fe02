import random
import statistics
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_matrix
from practiceprio.errors import ParseError, ValidationError
from practiceprio.scores import (
    RAW,
    SCALED,
    AnnotationTable,
    InfluenceMatrix,
    aggregate,
    format_matrix,
    merge_matrices,
    parse_annotations,
    parse_costs,
    parse_drop_list,
    parse_matrix,
    parse_weights,
    scale_level,
    scale_matrix,
    scale_score,
)


def table_from(columns: dict[str, list[int]], rows=None) -> AnnotationTable:
    n = len(next(iter(columns.values())))
    rows = rows or [(f"c{i}", "p") for i in range(n)]
    names = tuple(columns)
    cells = {r: tuple(columns[a][i] * 1000 for a in names) for i, r in enumerate(rows)}
    return AnnotationTable(names, tuple(rows), cells)


# --- parsing -----------------------------------------------------------------


def test_parse_table1(fixtures_dir):
    t = parse_annotations((fixtures_dir / "table1.tsv").read_text())
    assert t.annotators == ("score",)
    assert t.value("deployability", "Data Versioning", "score") == 0
    assert t.value("traceability", "Data Versioning", "score") == 3000
    assert t.value("understandability", "Documentation", "score") == 4000
    assert t.value("debuggability", "Logging of Metadata And Artifacts", "score") == 3000


def test_parse_header_only():
    t = parse_annotations("subcharacteristic\tpractice\tScore Annotator A\n")
    assert len(t) == 0
    assert t.practices == ()
    assert t.annotators == ("Score Annotator A",)


def test_parse_out_of_range_reports_row():
    doc = "subcharacteristic\tpractice\ta\tb\nx\tp\t1\t2\ny\tp\t5\t0\n"
    with pytest.raises(ParseError) as exc:
        parse_annotations(doc)
    assert exc.value.line == 3


@pytest.mark.parametrize(
    "doc, line",
    [
        ("subcharacteristic\tpractice\ta\nx\tp\tthree\n", 2),
        ("subcharacteristic\tpractice\ta\tb\nx\tp\t1\n", 2),
        ("subcharacteristic\tpractice\ta\nx\tp\t2.5\n", 2),
        ("subcharacteristic\tpractice\ta\nx\tp\t1\nx\tp\t2\n", 3),
        ("sub\tpractice\ta\n", 1),
        ("subcharacteristic\tpractice\n", 1),
    ],
)
def test_parse_errors(doc, line):
    with pytest.raises(ParseError) as exc:
        parse_annotations(doc)
    assert exc.value.line == line


def test_parse_matrix_half_levels(fixtures_dir):
    m = parse_matrix((fixtures_dir / "aggregated_sample.tsv").read_text())
    assert len(m.subchars) == 29
    assert m.u("Share a Clearly Defined Training Objective within the Team", "accuracy") == 1500
    # pairs that were never scored are materialized as zero
    assert m.u("documentation", "accuracy") == 0


def test_format_matrix_round_trip():
    m = random_matrix(random.Random(3), 5, 4, half_levels=True)
    assert parse_matrix(format_matrix(m)) == m


# --- aggregation -------------------------------------------------------------


def test_median_odd():
    m = aggregate(table_from({"a": [1], "b": [2], "c": [4]}))
    assert m.u("p", "c0") == 2000


def test_mean_two_annotators():
    m = aggregate(table_from({"a": [3], "b": [4]}), "mean")
    assert m.u("p", "c0") == 3500


def test_median_even_matches_sort_oracle():
    m = aggregate(table_from({"a": [2], "b": [3]}))
    assert Fraction(m.u("p", "c0"), 1000) == Fraction(statistics.median([2, 3])) == Fraction(5, 2)


def test_mean_rounds_half_away_from_zero():
    # 1/16 level = 62.5 millipoints
    cols = {f"a{i}": [1 if i == 0 else 0] for i in range(16)}
    assert aggregate(table_from(cols), "mean").u("p", "c0") == 63
    # 1/3 level = 333.33.. millipoints
    assert aggregate(table_from({"a": [1], "b": [0], "c": [0]}), "mean").u("p", "c0") == 333


def test_aggregate_empty_rejected():
    with pytest.raises(ValidationError):
        aggregate(parse_annotations("subcharacteristic\tpractice\ta\n"))


def test_aggregate_unknown_method():
    with pytest.raises(ValidationError):
        aggregate(table_from({"a": [1]}), "mode")


levels = st.integers(0, 4)


@given(st.lists(st.lists(levels, min_size=6, max_size=6), min_size=1, max_size=7), st.randoms(use_true_random=False))
def test_aggregate_matches_statistics_and_is_permutation_invariant(cols, rnd):
    names = [f"a{i}" for i in range(len(cols))]
    table = table_from(dict(zip(names, cols)))
    med = aggregate(table)
    mean = aggregate(table, "mean")
    for i in range(6):
        vals = [col[i] for col in cols]
        assert Fraction(med.u("p", f"c{i}"), 1000) == Fraction(statistics.median(vals)).limit_denominator(2)
        assert abs(Fraction(mean.u("p", f"c{i}"), 1000) - Fraction(sum(vals), len(vals))) <= Fraction(1, 2000)
    shuffled = names[:]
    rnd.shuffle(shuffled)
    permuted = table_from({n: cols[names.index(n)] for n in shuffled})
    assert aggregate(permuted) == med
    assert aggregate(permuted, "mean") == mean


@given(st.lists(levels, min_size=1, max_size=8), st.sampled_from([1, 3, 5]))
def test_median_of_identical_columns(col, copies):
    table = table_from({f"a{i}": col for i in range(copies)})
    m = aggregate(table)
    assert [m.u("p", f"c{i}") for i in range(len(col))] == [v * 1000 for v in col]


# --- scaling -----------------------------------------------------------------


@pytest.mark.parametrize("x, y", [(0, 0), (1, 1), (2, 2), (3, 6), (4, 24), ("2.5", 4), ("3.5", 15), ("1.5", "1.5")])
def test_scale_anchors(x, y):
    assert scale_level(x) == Fraction(y)


def test_scale_cumulative_product_anchors():
    # 0 followed by the running product of [1, 2, 3, 4]
    anchors, acc = [0], 1
    for f in [1, 2, 3, 4]:
        acc *= f
        anchors.append(acc)
    assert [scale_level(i) for i in range(5)] == anchors


def test_scale_millipoint_interface():
    assert scale_score(3500) == 15000
    assert scale_score(2.5) == 4000


@pytest.mark.parametrize("x", ["-0.001", "4.001", 5, -1])
def test_scale_domain(x):
    with pytest.raises(ValidationError, match="Not supported domain"):
        scale_score(x if isinstance(x, str) else Fraction(x))


def test_scale_monotone_dense_grid():
    ys = [scale_score(m) for m in range(0, 4001)]
    assert all(a <= b for a, b in zip(ys, ys[1:]))
    # both branches agree at the breakpoints
    assert 4 * 2000 - 6000 == scale_score(2000) == 2000
    assert 18 * 3000 - 48000 == scale_score(3000) == 6000


def test_scale_matrix():
    zero = InfluenceMatrix.from_cells({("p", "c"): 0, ("q", "c"): 0})
    assert scale_matrix(zero).values == zero.values
    t1 = InfluenceMatrix.from_cells({("Documentation", "understandability"): 4, ("x", "understandability"): "1.5"})
    s = scale_matrix(t1)
    assert s.scale_state == SCALED
    assert s.u("Documentation", "understandability") == 24000
    assert s.u("x", "understandability") == 1500
    with pytest.raises(ValidationError, match="already scaled"):
        scale_matrix(s)


def test_matrix_value_bounds():
    with pytest.raises(ValidationError):
        InfluenceMatrix.from_cells({("p", "c"): 5})
    InfluenceMatrix.from_cells({("p", "c"): 24}, scale_state=SCALED)
    with pytest.raises(ValidationError):
        InfluenceMatrix.from_cells({("p", "c"): 25}, scale_state=SCALED)


# --- merging -----------------------------------------------------------------


def _m(cells, source=None, scale_state=RAW):
    return InfluenceMatrix.from_cells(cells, source=source, scale_state=scale_state)


def test_merge_disjoint():
    a = _m({("p1", "c1"): 1, ("p2", "c2"): 2})
    b = _m({("q1", "c1"): 3})
    merged = merge_matrices([a, b])
    assert merged.practices == ("p1", "p2", "q1")
    assert merged.subchars == ("c1", "c2")
    assert merged.u("q1", "c2") == 0


def test_merge_drops_one_copy():
    internal = _m({("Data Versioning", "traceability"): 3, ("Documentation", "understandability"): 4}, "internal")
    external = _m({("Data Versioning", "traceability"): 2, ("Automated Tests", "testability"): 4}, "external")
    with pytest.raises(ValidationError, match="Data Versioning"):
        merge_matrices([internal, external])
    merged = merge_matrices([internal, external], drop=[("external", "Data Versioning")])
    assert merged.practices.count("Data Versioning") == 1
    assert merged.u("Data Versioning", "traceability") == 3000
    # positional source names work too
    assert merge_matrices([internal, external], drop=[("0", "Data Versioning")]).u("Data Versioning", "traceability") == 2000
    # a bare id drops every copy
    assert "Data Versioning" not in merge_matrices([internal, external], drop=["Data Versioning"]).practices


def test_merge_rejects_mixed_scale():
    with pytest.raises(ValidationError):
        merge_matrices([_m({("p", "c"): 1}), _m({("q", "c"): 1}, scale_state=SCALED)])


@settings(max_examples=40)
@given(st.integers(0, 10_000))
def test_merge_projection_and_associativity(seed):
    rng = random.Random(seed)
    parts = []
    for tag in "abc":
        m = random_matrix(rng, rng.randint(1, 4), rng.randint(1, 4))
        rename = {p: f"{tag}{p}" for p in m.practices}
        parts.append(
            InfluenceMatrix(m.subchars[::-1] if tag == "b" else m.subchars, tuple(rename.values()),
                            {rename[p]: (v[::-1] if tag == "b" else v) for p, v in m.values.items()})
        )
    a, b, c = parts
    merged = merge_matrices([a, b])
    assert merged.restrict(practices=a.practices, subchars=a.subchars) == a
    assert merged.restrict(practices=b.practices, subchars=b.subchars) == b
    left = merge_matrices([merge_matrices([a, b]), c])
    right = merge_matrices([a, merge_matrices([b, c])])
    cs = sorted(left.subchars)
    assert left.restrict(subchars=cs) == right.restrict(practices=left.practices, subchars=cs)


# --- auxiliary files ---------------------------------------------------------


def test_weights_costs_drop():
    w = parse_weights("subcharacteristic\tweight\naccuracy\t0.5\nfairness\t1\n")
    assert w == {"accuracy": Fraction(1, 2), "fairness": Fraction(1)}
    with pytest.raises(ParseError):
        parse_weights("accuracy\t1.5\n")
    costs = parse_costs("practice\tcost\np1\t2.5\n", "hours")
    assert costs.cost == {"p1": Fraction(5, 2)} and costs.budget_units == "hours"
    with pytest.raises(ParseError):
        parse_costs("p1\t0\n")
    assert parse_drop_list("Data Versioning\n\nexternal\tModel Versioning\n") == [
        "Data Versioning",
        ("external", "Model Versioning"),
    ]
