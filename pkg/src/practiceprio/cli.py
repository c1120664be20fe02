"""Command-line front end.

Exit status: 0 on success, 1 on a validation error, 2 on a parse or usage error.
Data goes to ``--output`` (or stdout); diagnostics go to stderr only.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import Sequence

from . import __version__
from .agreement import METRICS, pairwise_stats
from .coverage import WeightVector, coverage_report
from .errors import ParseError, ValidationError
from .fixedpoint import MILLI, format_fraction, json_number, parse_decimal
from .optimizer import (
    brute_force_select,
    coverage_curve,
    greedy_select,
    knapsack_greedy_select,
    search_space_size,
    verify_submodularity,
)
from .scores import (
    InfluenceMatrix,
    aggregate,
    format_matrix,
    merge_matrices,
    parse_annotations,
    parse_costs,
    parse_drop_list,
    parse_matrix,
    parse_weights,
    scale_matrix,
    RAW,
    SCALED,
)
from .sensitivity import sensitivity_run
from .sqm import default_quality_model, load_quality_model

DEFAULT_K_SCALED = "24"
DEFAULT_K_RAW = "4"

FORMATS = {
    "aggregate": ("tsv", "json"),
    "scale": ("tsv", "json"),
    "merge": ("tsv", "json"),
    "agreement": ("json", "csv"),
    "coverage": ("json", "csv"),
    "optimize": ("json",),
    "curve": ("csv", "json"),
    "sensitivity": ("json", "csv"),
    "check-submodular": ("json",),
    "search-space": ("tsv", "json"),
}


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # noqa: D401
        self.print_usage(sys.stderr)
        raise ParseError(message)


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc.strerror or exc}") from None


def _split_list(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [x.strip() for x in text.split(",") if x.strip()]


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


# --- argument groups ---------------------------------------------------------


def _add_output(p: argparse.ArgumentParser, cmd: str) -> None:
    p.add_argument("-o", "--output", help="write here instead of stdout")
    p.add_argument("--format", choices=FORMATS[cmd], default=FORMATS[cmd][0])


def _add_input(p: argparse.ArgumentParser, *, multi: bool = False) -> None:
    if multi:
        p.add_argument("--scores", action="append", required=True, help="scores TSV (repeat for each set)")
    else:
        p.add_argument("--scores", required=True, help="scores TSV")
    p.add_argument("--aggregated", action="store_true",
                   help="the scores file holds one already-aggregated score column")
    p.add_argument("--method", choices=("median", "mean"), default="median", help="annotator aggregation")
    p.add_argument("--model", help="quality-model TSV, or 'default' for the bundled model")
    p.add_argument("--subchars", help="comma-separated sub-characteristics to keep")


def _add_analysis(p: argparse.ArgumentParser) -> None:
    _add_input(p)
    scale = p.add_mutually_exclusive_group()
    scale.add_argument("--scale", dest="scale", action="store_true", default=True,
                       help="apply the piecewise-linear rescaling (default)")
    scale.add_argument("--no-scale", dest="scale", action="store_false", help="keep raw 0-4 scores")
    scale.add_argument("--scaled-input", action="store_true",
                       help="the scores file already holds scaled aggregated values")
    p.add_argument("--k", help="coverage threshold (default 24 scaled, 4 raw)")
    p.add_argument("--weights", help="TSV of subcharacteristic<TAB>weight; unlisted weigh 1")
    p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="practiceprio", description="Analyze and prioritize ML software practices.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("aggregate", help="combine annotator columns into one score per cell")
    _add_input(p)
    _add_output(p, "aggregate")

    p = sub.add_parser("scale", help="aggregate and apply the rescaling")
    _add_input(p)
    _add_output(p, "scale")

    p = sub.add_parser("merge", help="merge practice sets, dropping overlapping practices")
    _add_input(p, multi=True)
    p.add_argument("--drop", help="drop-list file: practice, or source<TAB>practice, per line")
    _add_output(p, "merge")

    p = sub.add_parser("agreement", help="pairwise inter-annotator agreement")
    p.add_argument("--scores", required=True)
    p.add_argument("--metric", choices=METRICS, default="plain")
    p.add_argument("--seed", type=int, default=0)
    _add_output(p, "agreement")

    p = sub.add_parser("coverage", help="coverage report for a practice set")
    _add_analysis(p)
    p.add_argument("--practices", help="comma-separated practice set (default: all)")
    _add_output(p, "coverage")

    p = sub.add_parser("optimize", help="select practices under a budget")
    _add_analysis(p)
    p.add_argument("--budget", required=True, help="number of practices, or total cost with --algorithm knapsack")
    p.add_argument("--algorithm", choices=("greedy", "brute", "brute_force", "knapsack"), default="greedy")
    p.add_argument("--costs", help="TSV of practice<TAB>cost (knapsack only)")
    p.add_argument("--legacy-gain", action="store_true",
                   help="greedy scores candidates by uncapped, unweighted influence on uncovered sub-characteristics")
    _add_output(p, "optimize")

    p = sub.add_parser("curve", help="greedy coverage fraction for every budget")
    _add_analysis(p)
    _add_output(p, "curve")

    p = sub.add_parser("sensitivity", help="ranking robustness under random score perturbation")
    _add_input(p)
    p.add_argument("--delta", type=int, default=1)
    p.add_argument("--iterations", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    _add_output(p, "sensitivity")

    p = sub.add_parser("check-submodular", help="randomized diminishing-returns check of the objective")
    _add_analysis(p)
    p.add_argument("--trials", type=int, default=1000)
    _add_output(p, "check-submodular")

    p = sub.add_parser("search-space", help="number of size-B subsets of n practices")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--b", type=int, required=True)
    _add_output(p, "search-space")
    return parser


# --- pipeline ---------------------------------------------------------------


def _load_raw(args, path: str) -> InfluenceMatrix:
    text = _read(path)
    if getattr(args, "scaled_input", False):
        m = parse_matrix(text, scale_state=SCALED, source=Path(path).stem)
    elif args.aggregated:
        m = parse_matrix(text, source=Path(path).stem)
    else:
        m = aggregate(parse_annotations(text), args.method)
        m = InfluenceMatrix(m.subchars, m.practices, m.values, m.scale_state, Path(path).stem)
    if args.model:
        model = default_quality_model() if args.model == "default" else load_quality_model(_read(args.model))
        m = m.with_subchars(model.subchar_ids)
    keep = _split_list(args.subchars)
    if keep is not None:
        m = m.restrict(subchars=keep)
    return m


def _load_for_analysis(args) -> tuple[InfluenceMatrix, WeightVector, str]:
    m = _load_raw(args, args.scores)
    if args.scale and m.scale_state == RAW and not args.scaled_input:
        m = scale_matrix(m)
    k = args.k or (DEFAULT_K_SCALED if m.scale_state == SCALED else DEFAULT_K_RAW)
    try:
        k_val = parse_decimal(k)
    except ValueError as exc:
        raise ParseError(f"--k: {exc}") from None
    if k_val <= 0:
        raise ValidationError("--k must be positive")
    if m.scale_state == SCALED and k_val <= 4:
        _warn(f"k={k} on a scaled matrix; a single 'strongly contributes' score already exceeds it")
    weights = WeightVector(parse_weights(_read(args.weights))) if args.weights else WeightVector()
    unknown = sorted(set(weights.w) - set(m.subchars))
    if unknown:
        _warn(f"weights for unknown sub-characteristics ignored: {', '.join(unknown)}")
    return m, weights, k


def _matrix_json(m: InfluenceMatrix) -> dict:
    return {
        "scale": m.scale_state,
        "subcharacteristics": list(m.subchars),
        "practices": list(m.practices),
        "values": [[json_number(Fraction(v, MILLI)) for v in m.values[p]] for p in m.practices],
    }


def _dump_json(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _csv(rows: Sequence[Sequence[object]]) -> str:
    buf = io.StringIO()
    csv.writer(buf, lineterminator="\n").writerows(rows)
    return buf.getvalue()


def _emit_matrix(m: InfluenceMatrix, fmt: str) -> str:
    return format_matrix(m) if fmt == "tsv" else _dump_json(_matrix_json(m))


# --- subcommands ------------------------------------------------------------


def cmd_aggregate(args) -> str:
    return _emit_matrix(_load_raw(args, args.scores), args.format)


def cmd_scale(args) -> str:
    return _emit_matrix(scale_matrix(_load_raw(args, args.scores)), args.format)


def cmd_merge(args) -> str:
    ms = [_load_raw(args, path) for path in args.scores]
    drop = parse_drop_list(_read(args.drop)) if args.drop else []
    return _emit_matrix(merge_matrices(ms, drop), args.format)


def cmd_agreement(args) -> str:
    stats = pairwise_stats(parse_annotations(_read(args.scores)), args.metric, args.seed)
    if args.format == "csv":
        doc = stats.to_json()
        return _csv([("a", "b", "value")] + [(r["a"], r["b"], repr(r["value"])) for r in doc["pairwise"]])
    return _dump_json(stats.to_json())


def cmd_coverage(args) -> str:
    m, w, k = _load_for_analysis(args)
    practices = _split_list(args.practices)
    report = coverage_report(m.practices if practices is None else practices, m, w, k)
    if args.format == "csv":
        return report.to_csv()
    doc = report.to_json()
    doc["practices"] = list(m.practices if practices is None else practices)
    return _dump_json(doc)


def cmd_optimize(args) -> str:
    m, w, k = _load_for_analysis(args)
    if args.algorithm == "knapsack":
        if not args.costs:
            raise ValidationError("--algorithm knapsack needs --costs")
        try:
            budget = parse_decimal(args.budget)
        except ValueError as exc:
            raise ParseError(f"--budget: {exc}") from None
        result = knapsack_greedy_select(m, w, k, parse_costs(_read(args.costs)), budget)
        if result.warning:
            _warn(result.warning)
    else:
        if args.costs:
            raise ValidationError("--costs only applies to --algorithm knapsack")
        try:
            budget = int(args.budget)
        except ValueError:
            raise ParseError(f"--budget must be an integer number of practices, got {args.budget!r}") from None
        if args.algorithm == "greedy":
            result = greedy_select(m, w, k, budget, gain="legacy" if args.legacy_gain else "marginal")
        else:
            if args.legacy_gain:
                raise ValidationError("--legacy-gain only applies to the greedy algorithm")
            result = brute_force_select(m, w, k, budget)
    return _dump_json(result.to_json())


def cmd_curve(args) -> str:
    m, w, k = _load_for_analysis(args)
    points = coverage_curve(m, w, k)
    if args.format == "json":
        return _dump_json(
            [
                {"budget": p.budget, "coverage_fraction": json_number(p.coverage_fraction), "value": json_number(p.value)}
                for p in points
            ]
        )
    rows = [("budget", "coverage_fraction", "value")]
    rows += [(p.budget, format_fraction(p.coverage_fraction), format_fraction(p.value)) for p in points]
    return _csv(rows)


def cmd_sensitivity(args) -> str:
    m = _load_raw(args, args.scores)
    result = sensitivity_run(m, args.delta, args.iterations, args.seed, keep_iterations=args.format == "csv")
    if result.skipped_iterations:
        _warn(f"{result.skipped_iterations} iteration(s) had a constant ranking and were skipped")
    if args.format == "csv":
        return result.iterations_csv()
    return _dump_json(result.to_json())


def cmd_check_submodular(args) -> str:
    m, w, k = _load_for_analysis(args)
    check = verify_submodularity(m, w, k, args.trials, args.seed)
    return _dump_json(check.to_json())


def cmd_search_space(args) -> str:
    size = search_space_size(args.n, args.b)
    if args.format == "json":
        return _dump_json({"n": args.n, "b": args.b, "size": size})
    return f"{size}\n"


COMMANDS = {
    "aggregate": cmd_aggregate,
    "scale": cmd_scale,
    "merge": cmd_merge,
    "agreement": cmd_agreement,
    "coverage": cmd_coverage,
    "optimize": cmd_optimize,
    "curve": cmd_curve,
    "sensitivity": cmd_sensitivity,
    "check-submodular": cmd_check_submodular,
    "search-space": cmd_search_space,
}


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        doc = COMMANDS[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValidationError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    if args.output:
        Path(args.output).write_text(doc, encoding="utf-8")
    else:
        sys.stdout.write(doc)
    return 0


def main() -> None:
    sys.exit(run())
