import itertools
import math
import random

import pytest
from hypothesis import assume, given
from hypothesis import strategies as st
from sklearn.metrics import cohen_kappa_score

from practiceprio.agreement import (
    cohen_kappa,
    collapse_small_gaps,
    collapsed_kappa,
    pairwise_stats,
    plain_agreement,
    practical_agreement,
)
from practiceprio.errors import ValidationError
from practiceprio.scores import AnnotationTable, parse_annotations


def make_table(cols: list[list[int]]) -> AnnotationTable:
    names = tuple(f"ann{i:02d}" for i in range(len(cols)))
    rows = tuple((f"c{i}", "p") for i in range(len(cols[0])))
    return AnnotationTable(names, rows, {r: tuple(c[i] * 1000 for c in cols) for i, r in enumerate(rows)})


def test_plain_examples():
    assert plain_agreement([0, 2, 4], [0, 2, 4]) == 1.0
    assert plain_agreement([0, 2, 4], [1, 2, 3]) == pytest.approx(1 / 3, abs=1e-15)
    assert plain_agreement([0], [4]) == 0.0


def test_practical_examples():
    assert practical_agreement([0, 2, 4], [1, 2, 3]) == 1.0
    assert practical_agreement([0], [2]) == 0.0


def test_kappa_examples():
    assert cohen_kappa([0, 0, 1, 1], [0, 0, 1, 1]) == 1.0
    # p_o = 1/2, p_e = (2*2 + 2*2) / 16 = 1/2
    assert cohen_kappa([0, 1, 0, 1], [0, 0, 1, 1]) == 0.0
    assert cohen_kappa([0, 0], [1, 1]) == 0.0
    assert cohen_kappa([3, 3, 3], [3, 3, 3]) == 1.0


@pytest.mark.parametrize("fn", [plain_agreement, practical_agreement, cohen_kappa])
def test_input_errors(fn):
    with pytest.raises(ValidationError):
        fn([1, 2], [1])
    with pytest.raises(ValidationError):
        fn([], [])


vec_pairs = st.integers(1, 30).flatmap(
    lambda n: st.tuples(st.lists(st.integers(0, 4), min_size=n, max_size=n), st.lists(st.integers(0, 4), min_size=n, max_size=n))
)


@given(vec_pairs)
def test_ordering_and_symmetry(pair):
    a, b = pair
    assert plain_agreement(a, b) <= practical_agreement(a, b)
    assert cohen_kappa(a, b) <= plain_agreement(a, b)
    assert -1 <= cohen_kappa(a, b) <= 1
    for fn in (plain_agreement, practical_agreement, cohen_kappa):
        assert fn(a, b) == fn(b, a)


@given(vec_pairs)
def test_kappa_matches_sklearn(pair):
    a, b = pair
    assume(len(set(a)) > 1 or len(set(b)) > 1)
    assert cohen_kappa(a, b) == pytest.approx(cohen_kappa_score(a, b), abs=1e-12)


def test_collapse_examples():
    assert collapsed_kappa([0, 1, 4], [0, 1, 4], 5) == 1.0
    a, b = [0, 4, 2, 0], [2, 1, 4, 3]
    for seed in range(10):
        assert collapsed_kappa(a, b, seed) == cohen_kappa(a, b)


def test_collapse_deterministic_and_seed_sensitive():
    rng = random.Random(1)
    a = [rng.randint(0, 4) for _ in range(200)]
    b = [max(0, min(4, x + rng.choice([-1, 0, 1, 2]))) for x in a]
    assert collapsed_kappa(a, b, random.Random(11)) == collapsed_kappa(a, b, random.Random(11))
    assert len({collapsed_kappa(a, b, s) for s in range(20)}) > 1


@given(vec_pairs, st.integers(0, 2**32))
def test_collapse_properties(pair, seed):
    a, b = pair
    ca, cb = collapse_small_gaps(a, b, random.Random(seed))
    for x, y, u, v in zip(a, b, ca, cb):
        if abs(x - y) <= 1:
            assert u == v and u in (x, y)
        else:
            assert (u, v) == (x, y)
    # seed-paired swap gives the same collapsed vectors, hence the same kappa
    assert collapsed_kappa(a, b, seed) == collapsed_kappa(b, a, seed)
    assert plain_agreement(ca, cb) == practical_agreement(a, b)


def test_collapse_preserves_marginals_in_expectation():
    a = [0, 1, 2, 3] * 50
    b = [1, 0, 3, 2] * 50
    counts = {v: 0 for v in range(5)}
    for seed in range(200):
        ca, _ = collapse_small_gaps(a, b, random.Random(seed))
        for v in ca:
            counts[v] += 1
    # every level appears with frequency 1/4 in the original; collapsed stays near that
    total = sum(counts.values())
    for v in range(4):
        assert counts[v] / total == pytest.approx(0.25, abs=0.01)


def test_pairwise_identical_annotators():
    stats = pairwise_stats(make_table([[0, 1, 2, 3]] * 3), "plain")
    assert stats.mean == 1.0 and stats.std_dev == 0.0 and stats.n_pairs == 3


def test_pairwise_two_annotators():
    stats = pairwise_stats(make_table([[0, 1, 2], [0, 1, 3]]), "practical")
    assert stats.n_pairs == 1 and stats.std_dev == 0.0 and stats.mean == 1.0


def test_pairwise_thirteen_annotators():
    rng = random.Random(0)
    table = make_table([[rng.randint(0, 4) for _ in range(40)] for _ in range(13)])
    stats = pairwise_stats(table, "kappa_practical", seed=3)
    assert stats.n_pairs == math.comb(13, 2) == 78
    assert len(stats.pairwise) == 2 * 78
    values = [stats.pairwise[p] for p in itertools.combinations(table.annotators, 2)]
    mean = sum(values) / 78
    assert stats.mean == pytest.approx(mean)
    assert stats.std_dev == pytest.approx(math.sqrt(sum((v - mean) ** 2 for v in values) / 78))
    for (x, y), v in stats.pairwise.items():
        assert stats.pairwise[(y, x)] == v
    assert pairwise_stats(table, "kappa_practical", seed=3) == stats


def test_pairwise_errors():
    with pytest.raises(ValidationError):
        pairwise_stats(make_table([[1, 2]]), "plain")
    with pytest.raises(ValidationError):
        pairwise_stats(make_table([[1], [2]]), "weighted")


def test_pairwise_on_fixture(fixtures_dir):
    table = parse_annotations((fixtures_dir / "annotators_synthetic.tsv").read_text())
    plain = pairwise_stats(table, "plain")
    practical = pairwise_stats(table, "practical")
    kappa = pairwise_stats(table, "kappa")
    collapsed = pairwise_stats(table, "kappa_practical")
    assert plain.mean <= practical.mean
    assert kappa.mean <= plain.mean
    # collapsing one-level gaps only adds agreement on this fixture
    assert collapsed.mean >= kappa.mean
