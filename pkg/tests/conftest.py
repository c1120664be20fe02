from __future__ import annotations

import random
import sys
from fractions import Fraction
from pathlib import Path

import pytest

from practiceprio.scores import InfluenceMatrix, scale_matrix

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


def random_matrix(
    rng: random.Random,
    n_practices: int,
    n_subchars: int,
    *,
    scaled: bool = False,
    half_levels: bool = False,
    zero_rate: float = 0.4,
) -> InfluenceMatrix:
    """Random raw matrix (optionally rescaled); sparse like real score tables."""
    step = Fraction(1, 2) if half_levels else Fraction(1)
    levels = [i * step for i in range(int(4 / step) + 1)]
    cells = {}
    for i in range(n_practices):
        for j in range(n_subchars):
            v = Fraction(0) if rng.random() < zero_rate else rng.choice(levels)
            cells[(f"p{i:02d}", f"c{j:02d}")] = v
    m = InfluenceMatrix.from_cells(
        cells,
        subchars=[f"c{j:02d}" for j in range(n_subchars)],
        practices=[f"p{i:02d}" for i in range(n_practices)],
    )
    return scale_matrix(m) if scaled else m


def random_weights(rng: random.Random, m: InfluenceMatrix) -> dict[str, Fraction]:
    return {c: Fraction(rng.randint(0, 10), 10) for c in m.subchars}


def demo_matrix() -> InfluenceMatrix:
    return InfluenceMatrix.from_cells(
        {
            ("p1", "c1"): 4, ("p1", "c2"): 0,
            ("p2", "c1"): 3, ("p2", "c2"): 3,
            ("p3", "c1"): 0, ("p3", "c2"): 4,
        }
    )


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
