"""Practice selection under a budget: exhaustive search, greedy, knapsack greedy.

Every algorithm breaks ties by practice id (lexicographic), and all objective
comparisons are exact, so results do not depend on platform or run.
"""
from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Literal, Mapping, Sequence

from .coverage import CoverageFunction, CoverageReport, WeightVector, report_from_totals
from .errors import ValidationError
from .fixedpoint import Number, json_number, to_fraction
from .scores import CostTable, InfluenceMatrix

Algorithm = Literal["greedy", "brute_force", "knapsack_greedy"]
Weights = WeightVector | Mapping[str, Number] | None


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[str, ...]
    value: Fraction
    report: CoverageReport
    algorithm: str
    budget: int | Fraction
    budget_used: int | Fraction
    exhausted: bool
    warning: str | None = None

    def to_json(self) -> dict:
        out = {
            "algorithm": self.algorithm,
            "budget": json_number(Fraction(self.budget)),
            "selected": list(self.selected),
            "value": json_number(self.value),
            "exhausted": self.exhausted,
            "budget_used": json_number(Fraction(self.budget_used)),
            "report": self.report.to_json(),
        }
        if self.warning:
            out["warning"] = self.warning
        return out


@dataclass(frozen=True)
class CurvePoint:
    budget: int
    coverage_fraction: Fraction
    value: Fraction


@dataclass(frozen=True)
class SubmodularityCheck:
    trials: int
    violations: int
    worst_margin: Fraction
    monotonicity_violations: int = 0

    def to_json(self) -> dict:
        return {
            "trials": self.trials,
            "violations": self.violations,
            "monotonicity_violations": self.monotonicity_violations,
            "worst_margin": json_number(self.worst_margin),
        }


def _canonical(m: InfluenceMatrix) -> list[str]:
    if not m.practices:
        raise ValidationError("matrix has no practices")
    return sorted(m.practices)


def _result(fn: CoverageFunction, selected: Sequence[str], algorithm: str, budget, used, exhausted, warning=None):
    totals = fn.totals(selected)
    report = report_from_totals(fn, totals)
    return SelectionResult(tuple(selected), report.weighted_value, report, algorithm, budget, used, exhausted, warning)


def brute_force_select(m: InfluenceMatrix, w: Weights, k: Number, B: int) -> SelectionResult:
    """Best size-``B`` subset by full enumeration.

    Subsets are visited in lexicographic order of the sorted practice ids and
    only a strictly better value replaces the incumbent, so the first maximizer
    wins.
    """
    order = _canonical(m)
    if not 1 <= B <= len(order):
        raise ValidationError(f"budget must be between 1 and {len(order)}, got {B}")
    fn = CoverageFunction(m, w, k)
    rows = [m.values[p] for p in order]
    kk = fn.k
    wnum = fn._wnum
    best_val = -1
    best: tuple[int, ...] = ()
    for combo in itertools.combinations(range(len(order)), B):
        val = 0
        for n, col in zip(wnum, zip(*(rows[i] for i in combo))):
            t = sum(col)
            val += n * (t if t < kk else kk)
        if val > best_val:
            best_val, best = val, combo
    return _result(fn, [order[i] for i in best], "brute_force", B, B, False)


def _legacy_score(fn: CoverageFunction, totals: Sequence[int], practice: str) -> int:
    # raw influence on still-uncovered sub-characteristics; no cap, no weights
    k = fn.k
    return sum(u for t, u in zip(totals, fn.matrix.values[practice]) if t < k)


def greedy_order(fn: CoverageFunction, B: int, gain: str = "marginal") -> tuple[list[str], list[int]]:
    """Greedy selection sequence and the final per-sub-characteristic totals."""
    if gain not in ("marginal", "legacy"):
        raise ValidationError(f"unknown gain rule {gain!r}")
    remaining = sorted(fn.matrix.practices)
    totals = [0] * fn.n_subchars
    selected: list[str] = []
    while len(selected) < B and remaining and not fn.saturated(totals):
        best_i, best_val = 0, None
        for i, p in enumerate(remaining):
            if gain == "marginal":
                v = fn.int_value_with(totals, p)
            else:
                v = _legacy_score(fn, totals, p)
            if best_val is None or v > best_val:
                best_i, best_val = i, v
        p = remaining.pop(best_i)
        selected.append(p)
        totals = fn.add(totals, p)
    return selected, totals


def greedy_select(m: InfluenceMatrix, w: Weights, k: Number, B: int, *, gain: str = "marginal") -> SelectionResult:
    """Repeatedly add the practice with the largest f(S + p).

    Stops at ``B`` practices, when every sub-characteristic is saturated, or
    when no practice is left; ``exhausted`` is set in the last two cases.
    ``gain="legacy"`` scores candidates by their unweighted, uncapped influence
    on still-uncovered sub-characteristics instead.
    """
    _canonical(m)
    if B < 1:
        raise ValidationError(f"budget must be at least 1, got {B}")
    fn = CoverageFunction(m, w, k)
    selected, _ = greedy_order(fn, B, gain)
    return _result(fn, selected, "greedy", B, len(selected), len(selected) < B)


def knapsack_greedy_select(
    m: InfluenceMatrix, w: Weights, k: Number, costs: CostTable | Mapping[str, Number], budget: Number
) -> SelectionResult:
    """Cost-aware greedy: best gain/cost ratio first, compared against the best single practice."""
    order = _canonical(m)
    cost_map = costs.cost if isinstance(costs, CostTable) else {p: to_fraction(c) for p, c in costs.items()}
    missing = [p for p in order if p not in cost_map]
    if missing:
        raise ValidationError(f"no cost for practice(s): {', '.join(missing)}")
    for p in order:
        if cost_map[p] <= 0:
            raise ValidationError(f"cost of {p!r} must be positive")
    cap = to_fraction(budget)
    if cap <= 0:
        raise ValidationError("budget must be positive")
    fn = CoverageFunction(m, w, k)

    affordable = [p for p in order if cost_map[p] <= cap]
    if not affordable:
        return _result(fn, [], "knapsack_greedy", cap, Fraction(0), False,
                       warning="budget is smaller than every practice cost")

    remaining = list(order)
    totals = [0] * fn.n_subchars
    selected: list[str] = []
    left = cap
    while remaining and not fn.saturated(totals):
        base = fn.int_value(totals)
        best_i = None
        best_gain, best_cost = 0, Fraction(1)
        for i, p in enumerate(remaining):
            c = cost_map[p]
            if c > left:
                continue
            g = fn.int_value_with(totals, p) - base
            # g / c > best_gain / best_cost, without division
            if best_i is None or g * best_cost > best_gain * c:
                best_i, best_gain, best_cost = i, g, c
        if best_i is None:
            break
        p = remaining.pop(best_i)
        selected.append(p)
        left -= cost_map[p]
        totals = fn.add(totals, p)
    greedy_val = fn.int_value(totals)
    exhausted = not remaining or fn.saturated(totals)

    single, single_val = affordable[0], -1
    for p in affordable:
        v = fn.int_value(m.values[p])
        if v > single_val:
            single, single_val = p, v
    if single_val > greedy_val:
        selected, exhausted = [single], False
    used = sum((cost_map[p] for p in selected), Fraction(0))
    return _result(fn, selected, "knapsack_greedy", cap, used, exhausted)


def coverage_curve(m: InfluenceMatrix, w: Weights, k: Number) -> list[CurvePoint]:
    """Greedy coverage for every budget 1..|P|; flat after full coverage."""
    order = _canonical(m)
    fn = CoverageFunction(m, w, k)
    selected, _ = greedy_order(fn, len(order))
    totals = [0] * fn.n_subchars
    points: list[CurvePoint] = []
    for i, p in enumerate(selected, start=1):
        totals = fn.add(totals, p)
        rep = report_from_totals(fn, totals)
        points.append(CurvePoint(i, rep.coverage_fraction, rep.weighted_value))
    last = points[-1] if points else CurvePoint(0, report_from_totals(fn, totals).coverage_fraction, Fraction(0))
    for b in range(len(selected) + 1, len(order) + 1):
        points.append(CurvePoint(b, last.coverage_fraction, last.value))
    return points


def search_space_size(n: int, B: int) -> int:
    if n < 0 or B < 0:
        raise ValidationError("n and B must be non-negative")
    if B > n:
        raise ValidationError(f"budget {B} exceeds the number of practices {n}")
    return math.comb(n, B)


def verify_submodularity(m: InfluenceMatrix, w: Weights, k: Number, trials: int = 1000, seed: int = 0) -> SubmodularityCheck:
    """Sample (X, a, b) and test f(X+a) - f(X) >= f(X+a+b) - f(X+b) exactly.

    Trial ``t`` draws from ``random.Random(seed ^ t)``, so any subset of trials
    can be replayed independently.
    """
    order = _canonical(m)
    if len(order) < 2:
        raise ValidationError("need at least 2 practices")
    if trials < 1:
        raise ValidationError("trials must be at least 1")
    fn = CoverageFunction(m, w, k)
    violations = mono = 0
    worst: int | None = None
    for t in range(trials):
        rng = random.Random(seed ^ t)
        a, b = rng.sample(order, 2)
        X = [p for p in order if p != a and p != b and rng.random() < 0.5]
        tx = fn.totals(X)
        fx = fn.int_value(tx)
        fxa = fn.int_value_with(tx, a)
        txb = fn.add(tx, b)
        fxb = fn.int_value(txb)
        fxab = fn.int_value_with(txb, a)
        margin = (fxa - fx) - (fxab - fxb)
        if margin < 0:
            violations += 1
        if fxa < fx or fxb < fx or fxab < fxb:
            mono += 1
        worst = margin if worst is None else min(worst, margin)
    return SubmodularityCheck(trials, violations, fn.to_value(worst), mono)
