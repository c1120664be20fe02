"""Score ingestion: annotator tables, aggregation, scaling and merging of practice sets.

All score values are integer millipoints (see :mod:`practiceprio.fixedpoint`).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Literal, Mapping, Sequence, Union

from .errors import ParseError, ValidationError
from .fixedpoint import MILLI, Number, format_millis, parse_decimal, round_half_away, to_millis

RAW = "raw"
SCALED = "scaled"
ScaleState = Literal["raw", "scaled"]

MAX_RAW = 4 * MILLI
MAX_SCALED = 24 * MILLI

SUBCHAR_COL = "subcharacteristic"
PRACTICE_COL = "practice"


@dataclass(frozen=True)
class AnnotationTable:
    """Per-annotator integer scores, one row per (sub-characteristic, practice)."""

    annotators: tuple[str, ...]
    rows: tuple[tuple[str, str], ...]
    # row -> one millipoint value per annotator, in annotator order
    cells: Mapping[tuple[str, str], tuple[int, ...]]

    def __post_init__(self) -> None:
        if len(set(self.annotators)) != len(self.annotators):
            raise ValidationError("duplicate annotator label")
        if set(self.rows) != set(self.cells) or len(set(self.rows)) != len(self.rows):
            raise ValidationError("rows and cells disagree")
        for key, values in self.cells.items():
            if len(values) != len(self.annotators):
                raise ValidationError(f"row {key} is not rectangular")
            for v in values:
                if v % MILLI or not 0 <= v <= MAX_RAW:
                    raise ValidationError(f"row {key}: {format_millis(v)} is not a level 0-4")

    @property
    def subchars(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(s for s, _ in self.rows))

    @property
    def practices(self) -> tuple[str, ...]:
        return tuple(dict.fromkeys(p for _, p in self.rows))

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, annotator: str) -> list[int]:
        """Integer levels of one annotator across all rows, in row order."""
        i = self.annotators.index(annotator)
        return [self.cells[r][i] // MILLI for r in self.rows]

    def value(self, subchar: str, practice: str, annotator: str) -> int:
        return self.cells[(subchar, practice)][self.annotators.index(annotator)]


@dataclass(frozen=True)
class InfluenceMatrix:
    """Aggregated influence u(p, c) in millipoints.

    ``values[p]`` is aligned with ``subchars``. Pairs that were never scored are
    materialized as 0.
    """

    subchars: tuple[str, ...]
    practices: tuple[str, ...]
    values: Mapping[str, tuple[int, ...]]
    scale_state: ScaleState = RAW
    source: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.scale_state not in (RAW, SCALED):
            raise ValidationError(f"unknown scale state {self.scale_state!r}")
        if len(set(self.subchars)) != len(self.subchars):
            raise ValidationError("duplicate sub-characteristic")
        if len(set(self.practices)) != len(self.practices):
            dup = _first_duplicate(self.practices)
            raise ValidationError(f"duplicate practice {dup!r}")
        if set(self.values) != set(self.practices):
            raise ValidationError("values do not match practices")
        cap = MAX_RAW if self.scale_state == RAW else MAX_SCALED
        for p, row in self.values.items():
            if len(row) != len(self.subchars):
                raise ValidationError(f"practice {p!r} has {len(row)} values for {len(self.subchars)} sub-characteristics")
            for v in row:
                if not 0 <= v <= cap:
                    raise ValidationError(f"practice {p!r}: value {format_millis(v)} outside [0, {cap // MILLI}]")

    @classmethod
    def from_cells(
        cls,
        cells: Mapping[tuple[str, str], Number],
        *,
        subchars: Sequence[str] | None = None,
        practices: Sequence[str] | None = None,
        scale_state: ScaleState = RAW,
        source: str | None = None,
    ) -> "InfluenceMatrix":
        """Build from ``{(practice, subchar): value}``; values are plain numbers."""
        if subchars is None:
            subchars = list(dict.fromkeys(c for _, c in cells))
        if practices is None:
            practices = list(dict.fromkeys(p for p, _ in cells))
        col = {c: i for i, c in enumerate(subchars)}
        values = {p: [0] * len(subchars) for p in practices}
        for (p, c), v in cells.items():
            if p not in values or c not in col:
                raise ValidationError(f"cell ({p!r}, {c!r}) outside the declared axes")
            values[p][col[c]] = to_millis(v)
        return cls(
            tuple(subchars),
            tuple(practices),
            {p: tuple(row) for p, row in values.items()},
            scale_state,
            source,
        )

    def u(self, practice: str, subchar: str) -> int:
        return self.values[practice][self.subchars.index(subchar)]

    def restrict(
        self, practices: Iterable[str] | None = None, subchars: Iterable[str] | None = None
    ) -> "InfluenceMatrix":
        """Projection onto a subset of practices and/or sub-characteristics (order as given)."""
        ps = tuple(practices) if practices is not None else self.practices
        cs = tuple(subchars) if subchars is not None else self.subchars
        unknown = [p for p in ps if p not in self.values]
        if unknown:
            raise ValidationError(f"unknown practice {unknown[0]!r}")
        idx = {c: i for i, c in enumerate(self.subchars)}
        missing = [c for c in cs if c not in idx]
        if missing:
            raise ValidationError(f"unknown sub-characteristic {missing[0]!r}")
        values = {p: tuple(self.values[p][idx[c]] for c in cs) for p in ps}
        return InfluenceMatrix(cs, ps, values, self.scale_state, self.source)

    def with_subchars(self, subchars: Sequence[str]) -> "InfluenceMatrix":
        """Re-index onto ``subchars``; sub-characteristics not present become all-zero."""
        extra = [c for c in self.subchars if c not in subchars]
        if extra:
            raise ValidationError(f"sub-characteristic {extra[0]!r} is not in the quality model")
        idx = {c: i for i, c in enumerate(self.subchars)}
        values = {
            p: tuple(row[idx[c]] if c in idx else 0 for c in subchars)
            for p, row in self.values.items()
        }
        return InfluenceMatrix(tuple(subchars), self.practices, values, self.scale_state, self.source)

    def cells(self) -> Iterable[tuple[str, str, int]]:
        """(subchar, practice, millipoints) in subchar-major order."""
        for j, c in enumerate(self.subchars):
            for p in self.practices:
                yield c, p, self.values[p][j]


def _first_duplicate(items: Iterable[str]) -> str | None:
    seen: set[str] = set()
    for x in items:
        if x in seen:
            return x
        seen.add(x)
    return None


def _split_tsv(document: str) -> list[tuple[int, list[str]]]:
    out = []
    for lineno, line in enumerate(document.splitlines(), start=1):
        if not line.strip():
            continue
        out.append((lineno, [c.strip() for c in line.split("\t")]))
    return out


def _read_header(lines: list[tuple[int, list[str]]], min_scores: int = 1) -> list[str]:
    if not lines:
        raise ParseError("missing header row", line=1)
    lineno, header = lines[0]
    if len(header) < 2 + min_scores or header[0] != SUBCHAR_COL or header[1] != PRACTICE_COL:
        raise ParseError(
            f"header must start with {SUBCHAR_COL}<TAB>{PRACTICE_COL} followed by score columns",
            line=lineno,
        )
    scores = header[2:]
    if any(not h for h in scores):
        raise ParseError("empty score column name", line=lineno)
    dup = _first_duplicate(scores)
    if dup is not None:
        raise ParseError(f"duplicate score column {dup!r}", line=lineno)
    return scores


def parse_annotations(document: str) -> AnnotationTable:
    """Read a scores TSV where every score column is one annotator's integer levels."""
    lines = _split_tsv(document)
    annotators = _read_header(lines)
    rows: list[tuple[str, str]] = []
    cells: dict[tuple[str, str], tuple[int, ...]] = {}
    for lineno, fields in lines[1:]:
        if len(fields) != 2 + len(annotators):
            raise ParseError(f"expected {2 + len(annotators)} columns, got {len(fields)}", line=lineno)
        subchar, practice = fields[0], fields[1]
        if not subchar or not practice:
            raise ParseError("empty sub-characteristic or practice", line=lineno)
        key = (subchar, practice)
        if key in cells:
            raise ParseError(f"duplicate row for {subchar!r} / {practice!r}", line=lineno)
        levels = []
        for text in fields[2:]:
            try:
                v = int(text)
            except ValueError:
                raise ParseError(f"score {text!r} is not an integer level", line=lineno) from None
            if not 0 <= v <= 4:
                raise ParseError(f"score {v} outside 0-4", line=lineno)
            levels.append(v * MILLI)
        rows.append(key)
        cells[key] = tuple(levels)
    return AnnotationTable(tuple(annotators), tuple(rows), cells)


def parse_matrix(document: str, *, scale_state: ScaleState = RAW, source: str | None = None) -> InfluenceMatrix:
    """Read an already-aggregated scores TSV (exactly one score column, decimals allowed)."""
    lines = _split_tsv(document)
    cols = _read_header(lines)
    if len(cols) != 1:
        raise ParseError(f"an aggregated scores file has one score column, found {len(cols)}", line=lines[0][0])
    cap = MAX_RAW if scale_state == RAW else MAX_SCALED
    cells: dict[tuple[str, str], int] = {}
    for lineno, fields in lines[1:]:
        if len(fields) != 3:
            raise ParseError(f"expected 3 columns, got {len(fields)}", line=lineno)
        subchar, practice, text = fields
        if not subchar or not practice:
            raise ParseError("empty sub-characteristic or practice", line=lineno)
        if (practice, subchar) in cells:
            raise ParseError(f"duplicate row for {subchar!r} / {practice!r}", line=lineno)
        try:
            v = to_millis(parse_decimal(text))
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if not 0 <= v <= cap:
            raise ParseError(f"score {text} outside [0, {cap // MILLI}]", line=lineno)
        cells[(practice, subchar)] = v
    return InfluenceMatrix.from_cells(
        {k: Fraction(v, MILLI) for k, v in cells.items()}, scale_state=scale_state, source=source
    )


def format_matrix(m: InfluenceMatrix, column: str = "score") -> str:
    """Inverse of :func:`parse_matrix`: one row per (subchar, practice), zeros included."""
    out = [f"{SUBCHAR_COL}\t{PRACTICE_COL}\t{column}"]
    for c, p, v in m.cells():
        out.append(f"{c}\t{p}\t{format_millis(v)}")
    return "\n".join(out) + "\n"


def _median(values: Sequence[int]) -> Fraction:
    s = sorted(values)
    n = len(s)
    mid = n // 2
    if n % 2:
        return Fraction(s[mid])
    return Fraction(s[mid - 1] + s[mid], 2)


def aggregate(table: AnnotationTable, method: str = "median") -> InfluenceMatrix:
    """Collapse annotators into one influence value per (practice, subchar)."""
    if not table.rows:
        raise ValidationError("cannot aggregate an empty annotation table")
    if method == "median":
        reduce = _median
    elif method == "mean":
        reduce = lambda vs: Fraction(sum(vs), len(vs))  # noqa: E731
    else:
        raise ValidationError(f"unknown aggregation method {method!r}")
    cells = {(p, c): Fraction(round_half_away(reduce(table.cells[(c, p)])), MILLI) for c, p in table.rows}
    return InfluenceMatrix.from_cells(cells, subchars=table.subchars, practices=table.practices)


def scale_score(x: Number) -> int:
    """Piecewise-linear penalty on weak contributions; input and output in millipoints.

    ``x`` may be an ``int`` (millipoints) or any other number in levels; the
    anchor levels 0,1,2,3,4 map to 0,1,2,6,24.
    """
    m = x if isinstance(x, int) and not isinstance(x, bool) else to_millis(x)
    if not 0 <= m <= MAX_RAW:
        raise ValidationError(f"Not supported domain of x = {format_millis(m)}")
    if m <= 2 * MILLI:
        return m
    if m <= 3 * MILLI:
        return 4 * m - 6 * MILLI
    return 18 * m - 48 * MILLI


def scale_level(x: Number) -> Fraction:
    """:func:`scale_score` in level units, for callers that do not deal in millipoints."""
    return Fraction(scale_score(to_millis(x)), MILLI)


def scale_matrix(m: InfluenceMatrix) -> InfluenceMatrix:
    if m.scale_state != RAW:
        raise ValidationError("matrix is already scaled")
    values = {p: tuple(scale_score(v) for v in row) for p, row in m.values.items()}
    return InfluenceMatrix(m.subchars, m.practices, values, SCALED, m.source)


DropEntry = Union[str, tuple[str, str]]


def merge_matrices(ms: Sequence[InfluenceMatrix], drop: Iterable[DropEntry] = ()) -> InfluenceMatrix:
    """Union of several practice sets with overlapping practices removed.

    A drop entry is either a practice id (removed from every source) or a
    ``(source, practice)`` pair that removes only that source's copy. Sources
    are matched against ``InfluenceMatrix.source`` or the matrix's position
    in ``ms`` as a string.
    """
    if not ms:
        raise ValidationError("nothing to merge")
    states = {m.scale_state for m in ms}
    if len(states) > 1:
        raise ValidationError("cannot merge raw and scaled matrices")
    drop_any: set[str] = set()
    drop_from: set[tuple[str, str]] = set()
    for entry in drop:
        if isinstance(entry, tuple):
            drop_from.add(entry)
        else:
            drop_any.add(entry)

    subchars = tuple(dict.fromkeys(c for m in ms for c in m.subchars))
    col = {c: i for i, c in enumerate(subchars)}
    practices: list[str] = []
    values: dict[str, tuple[int, ...]] = {}
    origin: dict[str, str] = {}
    for i, m in enumerate(ms):
        names = {str(i)} | ({m.source} if m.source is not None else set())
        for p in m.practices:
            if p in drop_any or any((n, p) in drop_from for n in names):
                continue
            if p in values:
                raise ValidationError(
                    f"practice {p!r} appears in both {origin[p]} and {m.source or i}; add one copy to the drop list"
                )
            row = [0] * len(subchars)
            for c, v in zip(m.subchars, m.values[p]):
                row[col[c]] = v
            practices.append(p)
            values[p] = tuple(row)
            origin[p] = str(m.source or i)
    return InfluenceMatrix(subchars, tuple(practices), values, ms[0].scale_state)


# --- auxiliary inputs -------------------------------------------------------


@dataclass(frozen=True)
class CostTable:
    cost: Mapping[str, Fraction]
    budget_units: str = "practices"

    def __post_init__(self) -> None:
        for p, c in self.cost.items():
            if c <= 0:
                raise ValidationError(f"cost of {p!r} must be positive, got {c}")


def parse_weights(document: str) -> dict[str, Fraction]:
    """``subcharacteristic<TAB>weight`` rows; a header row is optional."""
    weights: dict[str, Fraction] = {}
    for lineno, fields in _split_tsv(document):
        if lineno == 1 and fields[:1] == [SUBCHAR_COL]:
            continue
        if len(fields) != 2:
            raise ParseError(f"expected 2 columns, got {len(fields)}", line=lineno)
        try:
            w = parse_decimal(fields[1])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if not 0 <= w <= 1:
            raise ParseError(f"weight {fields[1]} outside [0, 1]", line=lineno)
        if fields[0] in weights:
            raise ParseError(f"duplicate weight for {fields[0]!r}", line=lineno)
        weights[fields[0]] = w
    return weights


def parse_costs(document: str, budget_units: str = "practices") -> CostTable:
    """``practice<TAB>cost`` rows; a header row is optional."""
    costs: dict[str, Fraction] = {}
    for lineno, fields in _split_tsv(document):
        if lineno == 1 and fields[:1] == [PRACTICE_COL]:
            continue
        if len(fields) != 2:
            raise ParseError(f"expected 2 columns, got {len(fields)}", line=lineno)
        try:
            c = parse_decimal(fields[1])
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        if c <= 0:
            raise ParseError(f"cost {fields[1]} must be positive", line=lineno)
        if fields[0] in costs:
            raise ParseError(f"duplicate cost for {fields[0]!r}", line=lineno)
        costs[fields[0]] = c
    return CostTable(costs, budget_units)


def parse_drop_list(document: str) -> list[DropEntry]:
    """One practice per line; ``source<TAB>practice`` restricts the drop to one source."""
    entries: list[DropEntry] = []
    for lineno, fields in _split_tsv(document):
        if len(fields) == 1:
            entries.append(fields[0])
        elif len(fields) == 2:
            entries.append((fields[0], fields[1]))
        else:
            raise ParseError("expected a practice id or source<TAB>practice", line=lineno)
    return entries
