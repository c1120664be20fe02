"""Analyze and prioritize ML software best practices against a software quality model."""
from __future__ import annotations

__version__ = "0.1.0"

from .agreement import (
    AgreementStats,
    cohen_kappa,
    collapsed_kappa,
    pairwise_stats,
    plain_agreement,
    practical_agreement,
)
from .coverage import CoverageReport, WeightVector, coverage_report, coverage_value, gaps
from .errors import ParseError, PrioError, ValidationError
from .optimizer import (
    CurvePoint,
    SelectionResult,
    SubmodularityCheck,
    brute_force_select,
    coverage_curve,
    greedy_select,
    knapsack_greedy_select,
    search_space_size,
    verify_submodularity,
)
from .scores import (
    AnnotationTable,
    CostTable,
    InfluenceMatrix,
    aggregate,
    merge_matrices,
    parse_annotations,
    parse_matrix,
    scale_matrix,
    scale_score,
)
from .sensitivity import SensitivityResult, perturb_score, rank_correlation, sensitivity_run
from .sqm import QualityModel, default_quality_model, load_quality_model, serialize_quality_model
