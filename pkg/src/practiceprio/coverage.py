"""Saturating weighted coverage of sub-characteristics by a set of practices.

    f(X) = sum_c w_c * min(k, sum_{p in X} u(p, c))

Internally weights are brought to a common denominator so that f is evaluated
with integer arithmetic only; public values are exact ``Fraction`` objects.
"""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping, Sequence

from .errors import ValidationError
from .fixedpoint import MILLI, Number, format_fraction, format_millis, json_number, to_fraction, to_millis
from .scores import InfluenceMatrix


@dataclass(frozen=True)
class WeightVector:
    """Importance per sub-characteristic; unlisted ones get ``default_weight``."""

    w: Mapping[str, Fraction] = field(default_factory=dict)
    default_weight: Fraction = Fraction(1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "w", {c: to_fraction(v) for c, v in self.w.items()})
        object.__setattr__(self, "default_weight", to_fraction(self.default_weight))
        for c, v in [*self.w.items(), ("<default>", self.default_weight)]:
            if not 0 <= v <= 1:
                raise ValidationError(f"weight for {c!r} must lie in [0, 1], got {v}")

    def weight(self, subchar: str) -> Fraction:
        return self.w.get(subchar, self.default_weight)

    def scaled(self, factor: Number) -> "WeightVector":
        lam = to_fraction(factor)
        return WeightVector({c: v * lam for c, v in self.w.items()}, self.default_weight * lam)


UNIFORM = WeightVector()


def _as_weights(w: WeightVector | Mapping[str, Number] | None) -> WeightVector:
    if w is None:
        return UNIFORM
    if isinstance(w, WeightVector):
        return w
    return WeightVector(dict(w))


class CoverageFunction:
    """f bound to a matrix, weights and threshold.

    ``k`` is given in score units (``10`` or ``"24"``), on whatever scale the
    matrix carries.
    """

    def __init__(self, m: InfluenceMatrix, w: WeightVector | Mapping[str, Number] | None, k: Number):
        self.matrix = m
        self.weights = _as_weights(w)
        self.k = to_millis(k)
        if self.k <= 0:
            raise ValidationError("coverage threshold k must be positive")
        ws = [self.weights.weight(c) for c in m.subchars]
        den = math.lcm(*(x.denominator for x in ws)) if ws else 1
        self._wnum = tuple(int(x * den) for x in ws)
        self._den = den * MILLI
        self._rows = m.values

    @property
    def n_subchars(self) -> int:
        return len(self.matrix.subchars)

    def check(self, practices: Iterable[str]) -> list[str]:
        xs = list(dict.fromkeys(practices))
        for p in xs:
            if p not in self._rows:
                raise ValidationError(f"unknown practice {p!r}")
        return xs

    def totals(self, practices: Iterable[str]) -> list[int]:
        t = [0] * self.n_subchars
        for p in self.check(practices):
            for j, v in enumerate(self._rows[p]):
                t[j] += v
        return t

    def add(self, totals: Sequence[int], practice: str) -> list[int]:
        return [a + b for a, b in zip(totals, self._rows[practice])]

    def int_value(self, totals: Sequence[int]) -> int:
        """f scaled by the common denominator, as an exact integer."""
        k = self.k
        return sum(n * (t if t < k else k) for n, t in zip(self._wnum, totals))

    def int_value_with(self, totals: Sequence[int], practice: str) -> int:
        k = self.k
        s = 0
        for n, t, u in zip(self._wnum, totals, self._rows[practice]):
            t += u
            s += n * (t if t < k else k)
        return s

    def to_value(self, int_value: int) -> Fraction:
        return Fraction(int_value, self._den)

    def value_of_totals(self, totals: Sequence[int]) -> Fraction:
        return self.to_value(self.int_value(totals))

    def __call__(self, practices: Iterable[str]) -> Fraction:
        return self.value_of_totals(self.totals(practices))

    def saturated(self, totals: Sequence[int]) -> bool:
        return all(t >= self.k for t in totals)

    def upper_bound(self) -> Fraction:
        return self.to_value(self.k * sum(self._wnum))


def coverage_value(
    X: Iterable[str],
    m: InfluenceMatrix,
    w: WeightVector | Mapping[str, Number] | None = None,
    k: Number = 24,
) -> Fraction:
    return CoverageFunction(m, w, k)(X)


@dataclass(frozen=True)
class SubcharCoverage:
    id: str
    raw_total: int  # millipoints
    saturated: int  # min(k, raw_total), millipoints
    covered: bool
    weight: Fraction


@dataclass(frozen=True)
class CoverageReport:
    k: int
    scale: str
    per_subchar: tuple[SubcharCoverage, ...]
    weighted_value: Fraction
    covered_count: int
    coverage_fraction: Fraction

    def __getitem__(self, subchar: str) -> SubcharCoverage:
        for s in self.per_subchar:
            if s.id == subchar:
                return s
        raise KeyError(subchar)

    def to_json(self) -> dict:
        return {
            "k": json_number(Fraction(self.k, MILLI)),
            "scale": self.scale,
            "weighted_value": json_number(self.weighted_value),
            "coverage_fraction": json_number(self.coverage_fraction),
            "subcharacteristics": [
                {
                    "id": s.id,
                    "raw_total": json_number(Fraction(s.raw_total, MILLI)),
                    "saturated": json_number(Fraction(s.saturated, MILLI)),
                    "covered": s.covered,
                    "weight": json_number(s.weight),
                }
                for s in self.per_subchar
            ],
            "gaps": gaps(self),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["id", "raw_total", "saturated", "covered", "weight", "k"])
        for s in self.per_subchar:
            writer.writerow(
                [
                    s.id,
                    format_millis(s.raw_total),
                    format_millis(s.saturated),
                    str(s.covered).lower(),
                    format_fraction(s.weight),
                    format_millis(self.k),
                ]
            )
        return buf.getvalue()


def report_from_totals(fn: CoverageFunction, totals: Sequence[int]) -> CoverageReport:
    m = fn.matrix
    per = tuple(
        SubcharCoverage(c, t, min(t, fn.k), t >= fn.k, fn.weights.weight(c))
        for c, t in zip(m.subchars, totals)
    )
    covered = sum(s.covered for s in per)
    frac = Fraction(covered, len(per)) if per else Fraction(0)
    return CoverageReport(fn.k, m.scale_state, per, fn.value_of_totals(totals), covered, frac)


def coverage_report(
    X: Iterable[str],
    m: InfluenceMatrix,
    w: WeightVector | Mapping[str, Number] | None = None,
    k: Number = 24,
) -> CoverageReport:
    fn = CoverageFunction(m, w, k)
    return report_from_totals(fn, fn.totals(X))


def gaps(report: CoverageReport) -> list[str]:
    """Uncovered sub-characteristics, weakest first, ties by id."""
    open_ = [s for s in report.per_subchar if not s.covered]
    return [s.id for s in sorted(open_, key=lambda s: (s.raw_total, s.id))]
