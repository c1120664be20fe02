"""Robustness of the sub-characteristic ranking to random score noise."""
from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import PrioError, ValidationError
from .fixedpoint import MILLI, Number, to_fraction
from .scores import MAX_RAW, RAW, InfluenceMatrix, scale_score


class UndefinedCorrelation(PrioError, ValueError):
    """One of the rankings is constant, so the correlation has no value."""


def perturb_score(x: int, delta: int, rng: random.Random) -> int:
    """``x + d`` clamped to 0..4, with ``d`` uniform on the integers ``-delta..delta``."""
    return max(0, min(4, x + rng.randint(-delta, delta)))


def _perturb_millis(x: int, delta: int, rng: random.Random) -> int:
    return max(0, min(MAX_RAW, x + MILLI * rng.randint(-delta, delta)))


def average_ranks(values: Sequence[Number]) -> list[Fraction]:
    """1-based ranks; tied values share the mean of the ranks they span."""
    xs = [to_fraction(v) if not isinstance(v, int) else v for v in values]
    order = sorted(range(len(xs)), key=lambda i: xs[i])
    ranks: list[Fraction] = [Fraction(0)] * len(xs)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and xs[order[j + 1]] == xs[order[i]]:
            j += 1
        r = Fraction(i + j + 2, 2)
        for t in range(i, j + 1):
            ranks[order[t]] = r
        i = j + 1
    return ranks


def rank_correlation(a: Sequence[Number], b: Sequence[Number]) -> float:
    """Pearson correlation of the average ranks of ``a`` and ``b`` (Spearman's rho)."""
    if len(a) != len(b):
        raise ValidationError(f"vectors differ in length ({len(a)} vs {len(b)})")
    if len(a) < 2:
        raise ValidationError("need at least 2 values")
    ra, rb = average_ranks(a), average_ranks(b)
    n = len(ra)
    ma, mb = sum(ra) / n, sum(rb) / n
    sab = sum((x - ma) * (y - mb) for x, y in zip(ra, rb))
    saa = sum((x - ma) ** 2 for x in ra)
    sbb = sum((y - mb) ** 2 for y in rb)
    if saa == 0 or sbb == 0:
        raise UndefinedCorrelation("correlation is undefined for a constant ranking")
    r2 = sab * sab / (saa * sbb)
    r = math.sqrt(r2.numerator / r2.denominator) if r2 != 1 else 1.0
    return math.copysign(min(r, 1.0), sab)


@dataclass(frozen=True)
class SensitivityResult:
    delta: int
    iterations: int
    seed: int
    mean_correlation: float
    variance: float
    skipped_iterations: int = 0
    per_iteration: tuple[float | None, ...] | None = field(default=None, compare=False)

    def to_json(self) -> dict:
        return {
            "delta": self.delta,
            "iterations": self.iterations,
            "seed": self.seed,
            "mean_correlation": self.mean_correlation,
            "variance": self.variance,
            "skipped_iterations": self.skipped_iterations,
        }

    def iterations_csv(self) -> str:
        rows = ["iteration,correlation"]
        for i, r in enumerate(self.per_iteration or ()):
            rows.append(f"{i},{'' if r is None else repr(r)}")
        return "\n".join(rows) + "\n"


def sensitivity_run(
    m: InfluenceMatrix, delta: int, iterations: int = 1000, seed: int = 0, *, keep_iterations: bool = False
) -> SensitivityResult:
    """Perturb every raw score, rescale, and correlate the sub-characteristic ranking with the original.

    Iteration ``i`` draws from ``random.Random(seed ^ i)``. Iterations whose
    perturbed ranking is constant are skipped and counted.
    """
    if m.scale_state != RAW:
        raise ValidationError("sensitivity analysis perturbs raw scores; got a scaled matrix")
    if delta < 0:
        raise ValidationError("delta must be non-negative")
    if iterations < 1:
        raise ValidationError("iterations must be at least 1")
    if len(m.subchars) < 2:
        raise ValidationError("need at least 2 sub-characteristics to rank")

    n_sub = len(m.subchars)
    rows = [m.values[p] for p in m.practices]
    original = [sum(scale_score(r[j]) for r in rows) for j in range(n_sub)]
    # raises UndefinedCorrelation if the unperturbed ranking is itself constant
    rank_correlation(original, original)

    results: list[float | None] = []
    for i in range(iterations):
        rng = random.Random(seed ^ i)
        totals = [0] * n_sub
        for r in rows:
            for j, v in enumerate(r):
                totals[j] += scale_score(_perturb_millis(v, delta, rng))
        try:
            results.append(rank_correlation(original, totals))
        except UndefinedCorrelation:
            results.append(None)

    kept = [r for r in results if r is not None]
    if not kept:
        raise UndefinedCorrelation("every iteration produced a constant ranking")
    return SensitivityResult(
        delta,
        iterations,
        seed,
        statistics.fmean(kept),
        statistics.pvariance(kept),
        len(results) - len(kept),
        tuple(results) if keep_iterations else None,
    )
