"""Inter-annotator agreement on integer score levels."""
from __future__ import annotations

import itertools
import random
import statistics
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Mapping, Sequence

from .errors import ValidationError
from .scores import AnnotationTable

Metric = Literal["plain", "practical", "kappa", "kappa_practical"]
METRICS: tuple[str, ...] = ("plain", "practical", "kappa", "kappa_practical")


def _check(a: Sequence[int], b: Sequence[int]) -> None:
    if len(a) != len(b):
        raise ValidationError(f"score vectors differ in length ({len(a)} vs {len(b)})")
    if not a:
        raise ValidationError("score vectors are empty")


def _plain(a: Sequence[int], b: Sequence[int]) -> Fraction:
    return Fraction(sum(x == y for x, y in zip(a, b)), len(a))


def plain_agreement(a: Sequence[int], b: Sequence[int]) -> float:
    """Share of positions where both annotators gave the same level."""
    _check(a, b)
    return float(_plain(a, b))


def practical_agreement(a: Sequence[int], b: Sequence[int]) -> float:
    """Share of positions where the levels differ by at most one."""
    _check(a, b)
    return float(Fraction(sum(abs(x - y) <= 1 for x, y in zip(a, b)), len(a)))


def _kappa(a: Sequence[int], b: Sequence[int]) -> Fraction:
    n = len(a)
    p_o = _plain(a, b)
    ca, cb = Counter(a), Counter(b)
    p_e = Fraction(sum(ca[v] * cb[v] for v in ca), n * n)
    if p_e == 1:
        # both annotators constant on the same level
        return Fraction(1)
    return (p_o - p_e) / (1 - p_e)


def cohen_kappa(a: Sequence[int], b: Sequence[int]) -> float:
    _check(a, b)
    return float(_kappa(a, b))


def collapse_small_gaps(a: Sequence[int], b: Sequence[int], rng: random.Random) -> tuple[list[int], list[int]]:
    """Overwrite one-level disagreements with one of the two values, picked by ``rng``.

    The draw picks the lower or the higher value, not "a's" or "b's", so
    swapping the arguments under the same seed gives the same result.
    """
    ca, cb = list(a), list(b)
    for i, (x, y) in enumerate(zip(a, b)):
        if abs(x - y) == 1:
            v = min(x, y) if rng.random() < 0.5 else max(x, y)
            ca[i] = cb[i] = v
    return ca, cb


def collapsed_kappa(a: Sequence[int], b: Sequence[int], rng: random.Random | int = 0) -> float:
    """Cohen's kappa after collapsing one-level gaps."""
    _check(a, b)
    if not isinstance(rng, random.Random):
        rng = random.Random(rng)
    return float(_kappa(*collapse_small_gaps(a, b, rng)))


@dataclass(frozen=True)
class AgreementStats:
    metric: str
    pairwise: Mapping[tuple[str, str], float]
    mean: float
    std_dev: float
    n_pairs: int

    def to_json(self) -> dict:
        annotators = sorted({x for pair in self.pairwise for x in pair})
        pairs = [
            {"a": a, "b": b, "value": self.pairwise[(a, b)]}
            for a, b in itertools.combinations(annotators, 2)
            if (a, b) in self.pairwise
        ]
        return {
            "metric": self.metric,
            "pairs": self.n_pairs,
            "mean": self.mean,
            "std_dev": self.std_dev,
            "pairwise": pairs,
        }


def pairwise_stats(table: AnnotationTable, metric: str = "plain", seed: int = 0) -> AgreementStats:
    """Metric for every unordered annotator pair, with mean and population std-dev.

    Pair ``i`` (in ``itertools.combinations`` order over the table's annotators)
    uses ``random.Random(seed ^ i)`` for the collapsed kappa.
    """
    if metric not in METRICS:
        raise ValidationError(f"unknown metric {metric!r}; choose from {', '.join(METRICS)}")
    if len(table.annotators) < 2:
        raise ValidationError("need at least 2 annotators")
    if not table.rows:
        raise ValidationError("annotation table is empty")
    cols = {name: table.column(name) for name in table.annotators}
    pairwise: dict[tuple[str, str], float] = {}
    values: list[float] = []
    for i, (x, y) in enumerate(itertools.combinations(table.annotators, 2)):
        a, b = cols[x], cols[y]
        if metric == "plain":
            v = plain_agreement(a, b)
        elif metric == "practical":
            v = practical_agreement(a, b)
        elif metric == "kappa":
            v = cohen_kappa(a, b)
        else:
            v = collapsed_kappa(a, b, random.Random(seed ^ i))
        pairwise[(x, y)] = pairwise[(y, x)] = v
        values.append(v)
    return AgreementStats(metric, pairwise, statistics.fmean(values), statistics.pstdev(values), len(values))
