"""Software quality model for ML systems: characteristics and their sub-characteristics."""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .errors import ParseError, ValidationError

HEADER = ("characteristic", "subcharacteristic", "definition")


@dataclass(frozen=True)
class Subcharacteristic:
    id: str
    definition: str = ""


@dataclass(frozen=True)
class Characteristic:
    name: str
    subcharacteristics: tuple[Subcharacteristic, ...]
    # the tabular file format has no column for this, so it is not part of equality
    definition: str = field(default="", compare=False)


@dataclass(frozen=True)
class QualityModel:
    characteristics: tuple[Characteristic, ...]

    def __post_init__(self) -> None:
        seen: set[str] = set()
        for ch in self.characteristics:
            if not ch.name or _has_control(ch.name):
                raise ValidationError(f"invalid characteristic name {ch.name!r}")
            if not ch.subcharacteristics:
                raise ValidationError(f"characteristic {ch.name!r} has no sub-characteristics")
            for sub in ch.subcharacteristics:
                if not sub.id or _has_control(sub.id):
                    raise ValidationError(f"invalid sub-characteristic id {sub.id!r}")
                if "\t" in sub.definition or "\n" in sub.definition:
                    raise ValidationError(f"definition of {sub.id!r} contains a tab or newline")
                if sub.id in seen:
                    raise ValidationError(f"duplicate sub-characteristic id {sub.id!r}")
                seen.add(sub.id)

    @property
    def subchar_ids(self) -> tuple[str, ...]:
        return tuple(s.id for ch in self.characteristics for s in ch.subcharacteristics)

    def characteristic_of(self, subchar_id: str) -> str:
        for ch in self.characteristics:
            if any(s.id == subchar_id for s in ch.subcharacteristics):
                return ch.name
        raise KeyError(subchar_id)

    def __len__(self) -> int:
        return sum(len(ch.subcharacteristics) for ch in self.characteristics)


def _has_control(text: str) -> bool:
    return "\t" in text or "\n" in text or "\r" in text


def load_quality_model(source: str) -> QualityModel:
    """Parse the tab-separated model format.

    Characteristics appear in order of first appearance; rows for the same
    characteristic need not be contiguous.
    """
    lines = source.splitlines()
    if not lines:
        raise ParseError("empty quality-model document", line=1)
    header = tuple(c.strip() for c in lines[0].split("\t"))
    if header != HEADER:
        raise ParseError(f"expected header {'<TAB>'.join(HEADER)}", line=1)

    groups: dict[str, list[Subcharacteristic]] = {}
    seen: dict[str, int] = {}
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        cells = line.split("\t")
        if len(cells) != 3:
            raise ParseError(f"expected 3 columns, got {len(cells)}", line=lineno)
        char_name, sub_id, definition = (c.strip() for c in cells)
        if not char_name:
            raise ValidationError(f"line {lineno}: empty characteristic name")
        if not sub_id:
            raise ValidationError(f"line {lineno}: empty sub-characteristic id")
        if sub_id in seen:
            raise ValidationError(
                f"line {lineno}: duplicate sub-characteristic id {sub_id!r} "
                f"(first seen on line {seen[sub_id]})"
            )
        seen[sub_id] = lineno
        groups.setdefault(char_name, []).append(Subcharacteristic(sub_id, definition))

    return QualityModel(
        tuple(Characteristic(name, tuple(subs)) for name, subs in groups.items())
    )


def serialize_quality_model(model: QualityModel) -> str:
    rows = ["\t".join(HEADER)]
    for ch in model.characteristics:
        for sub in ch.subcharacteristics:
            rows.append(f"{ch.name}\t{sub.id}\t{sub.definition}")
    return "\n".join(rows) + "\n"


@lru_cache(maxsize=None)
def default_quality_model() -> QualityModel:
    """The bundled model: 7 characteristics, 29 sub-characteristics."""
    text = resources.files("practiceprio").joinpath("data/quality_model.tsv").read_text("utf-8")
    return load_quality_model(text)
