"""Controlled-vocabulary standardization of attribute names and units."""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

from argus.errors import CardinalityTooHigh, DictionaryError, TypeConflict
from argus.model import (
    IDENTIFIER_RE,
    AttributeField,
    Dataset,
    Feature,
    FeatureLayer,
    RasterGrid,
    ValueType,
    snake_case,
)

MAX_CATEGORIES = 64
_NOISE = re.compile(r"[\s_\-]+")

# (dictionary type, observed type) pairs accepted without complaint
_COMPATIBLE = {
    (ValueType.REAL, ValueType.INTEGER),
    (ValueType.CATEGORICAL, ValueType.TEXT),
    (ValueType.TEXT, ValueType.CATEGORICAL),
}


def match_key(name: str) -> str:
    """Case-folded name with underscores, hyphens and whitespace removed."""
    return _NOISE.sub("", name).casefold()


def unit_key(unit: str | None) -> str | None:
    return None if unit is None else unit.strip().casefold()


@dataclass(frozen=True)
class UnitConversion:
    """``canonical = raw * factor + offset``."""

    factor: float
    offset: float = 0.0

    def __post_init__(self) -> None:
        if not math.isfinite(self.factor) or self.factor == 0:
            raise DictionaryError(f"conversion factor must be finite and nonzero, got {self.factor}")
        if not math.isfinite(self.offset):
            raise DictionaryError(f"conversion offset must be finite, got {self.offset}")

    def apply(self, value: float) -> float:
        return value * self.factor + self.offset

    def invert(self, value: float) -> float:
        return (value - self.offset) / self.factor


@dataclass(frozen=True)
class DictionaryEntry:
    canonical_name: str
    description: str
    unit: str | None
    value_type: ValueType
    synonyms: tuple[str, ...] = ()
    conversions: dict[str, UnitConversion] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not IDENTIFIER_RE.match(self.canonical_name):
            raise DictionaryError(f"canonical name {self.canonical_name!r} is not a snake_case identifier")
        object.__setattr__(self, "value_type", ValueType(self.value_type))
        object.__setattr__(self, "synonyms", tuple(self.synonyms))
        object.__setattr__(self, "conversions", {unit_key(k): v for k, v in dict(self.conversions).items()})

    def conversion_for(self, unit: str | None) -> UnitConversion | None:
        """Conversion from ``unit`` to the canonical unit; identity when they agree
        or the field carries no unit; ``None`` when the unit is unknown."""
        key = unit_key(unit)
        if key is None or key == unit_key(self.unit):
            return UnitConversion(1.0)
        return self.conversions.get(key)


def _parse_number(text: str) -> float:
    # allows "1/3.6" so exact reciprocals can be written naturally
    if "/" in text:
        num, den = text.split("/", 1)
        return float(num) / float(den)
    return float(text)


def _parse_conversions(cell: str, where: str) -> dict[str, UnitConversion]:
    out: dict[str, UnitConversion] = {}
    for item in filter(None, (c.strip() for c in cell.split(";"))):
        unit, sep, spec = item.rpartition("=")
        if not sep or not unit.strip():
            raise DictionaryError(f"{where}: conversion {item!r} is not 'unit=factor[,offset]'")
        parts = [p.strip() for p in spec.split(",")]
        try:
            factor = _parse_number(parts[0])
            offset = _parse_number(parts[1]) if len(parts) > 1 else 0.0
        except (ValueError, ZeroDivisionError):
            raise DictionaryError(f"{where}: conversion {item!r} has a non-numeric factor") from None
        if len(parts) > 2:
            raise DictionaryError(f"{where}: conversion {item!r} has too many numbers")
        out[unit.strip()] = UnitConversion(factor, offset)
    return out


class AttributeDictionary:
    """Canonical field definitions plus a normalized synonym index."""

    COLUMNS = ("canonical_name", "description", "unit", "type", "synonyms", "conversions")

    def __init__(self, entries: Iterable[DictionaryEntry]) -> None:
        self.entries: dict[str, DictionaryEntry] = {}
        self._index: dict[str, str] = {}
        for e in entries:
            if e.canonical_name in self.entries:
                raise DictionaryError(f"canonical name {e.canonical_name!r} defined twice")
            self.entries[e.canonical_name] = e
        for e in self.entries.values():
            for name in (e.canonical_name, *e.synonyms):
                key = match_key(name)
                owner = self._index.setdefault(key, e.canonical_name)
                if owner != e.canonical_name:
                    raise DictionaryError(f"synonym {name!r} maps to both {owner!r} and {e.canonical_name!r}")

    def __len__(self) -> int:
        return len(self.entries)

    def __contains__(self, canonical_name: str) -> bool:
        return canonical_name in self.entries

    def lookup(self, name: str) -> DictionaryEntry | None:
        canonical = self._index.get(match_key(name))
        return self.entries[canonical] if canonical else None

    @classmethod
    def parse(cls, text: str) -> AttributeDictionary:
        entries = []
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.lstrip().startswith("#"):
                continue
            cells = [c.strip() for c in line.split("|")]
            if cells[0] == "canonical_name":
                continue
            if len(cells) < 4 or len(cells) > 6:
                raise DictionaryError(f"line {lineno}: expected 4 to 6 '|'-separated columns, found {len(cells)}")
            cells += [""] * (6 - len(cells))
            name, desc, unit, vtype, syns, convs = cells
            try:
                value_type = ValueType(vtype.lower())
            except ValueError:
                raise DictionaryError(f"line {lineno}: unknown value type {vtype!r}") from None
            entries.append(
                DictionaryEntry(
                    canonical_name=name,
                    description=desc,
                    unit=unit or None,
                    value_type=value_type,
                    synonyms=tuple(s.strip() for s in syns.split(";") if s.strip()),
                    conversions=_parse_conversions(convs, f"line {lineno}"),
                )
            )
        return cls(entries)

    @classmethod
    def load(cls, path: str | Path) -> AttributeDictionary:
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def dump(self) -> str:
        lines = ["|".join(self.COLUMNS)]
        for e in self.entries.values():
            convs = ";".join(
                f"{u}={c.factor!r}" + (f",{c.offset!r}" if c.offset else "") for u, c in e.conversions.items()
            )
            lines.append("|".join([e.canonical_name, e.description, e.unit or "", e.value_type.value,
                                   ";".join(e.synonyms), convs]))
        return "\n".join(lines) + "\n"


@dataclass
class StandardizationReport:
    layer: str
    total: int
    matched: list[tuple[str, str]] = field(default_factory=list)
    unmatched: list[str] = field(default_factory=list)
    conflicts: list[TypeConflict] = field(default_factory=list)

    @property
    def matched_count(self) -> int:
        return len(self.matched)

    def to_text(self) -> str:
        out = [f"layer: {self.layer}", f"matched: {self.matched_count}/{self.total}"]
        out += [f"  {raw} -> {canonical}" for raw, canonical in self.matched]
        out.append(f"unmatched: {len(self.unmatched)}")
        out += [f"  {raw}" for raw in self.unmatched]
        if self.conflicts:
            out.append(f"conflicts: {len(self.conflicts)}")
            out += [f"  {c}" for c in self.conflicts]
        return "\n".join(out) + "\n"


def _observed_types(values: Sequence) -> set[ValueType]:
    seen = set()
    for v in values:
        if v is None:
            continue
        if isinstance(v, bool):
            seen.add(ValueType.BOOLEAN)
        elif isinstance(v, int):
            seen.add(ValueType.INTEGER)
        elif isinstance(v, float):
            seen.add(ValueType.REAL)
        elif isinstance(v, str):
            seen.add(ValueType.TEXT)
        else:
            seen.add(ValueType.DATE)
    return seen


def _check_type(entry: DictionaryEntry, f: AttributeField, values: Sequence) -> str | None:
    want = entry.value_type
    for t in {f.value_type} | _observed_types(values):
        if t != want and (want, t) not in _COMPATIBLE:
            if not any(v is not None for v in values) and t == f.value_type:
                continue  # an all-null column carries no evidence
            return f"field {f.raw_name!r} holds {t.value} cells but {entry.canonical_name!r} is {want.value}"
    return None


def standardize_layer(layer: FeatureLayer, dictionary: AttributeDictionary) -> tuple[FeatureLayer, StandardizationReport]:
    report = StandardizationReport(layer.name, len(layer.schema))
    schema = list(layer.schema)
    columns = [list(col) for col in zip(*(r.values for r in layer.rows))] or [[] for _ in schema]
    claimed: dict[str, str] = {}
    for i, f in enumerate(layer.schema):
        entry = dictionary.lookup(f.canonical_name or f.raw_name)
        if entry is None:
            report.unmatched.append(f.raw_name)
            continue
        problem = _check_type(entry, f, columns[i])
        conv = entry.conversion_for(f.unit)
        if problem is None and conv is None:
            problem = f"field {f.raw_name!r} has unit {f.unit!r} with no conversion to {entry.unit!r}"
        if problem is None and entry.canonical_name in claimed:
            problem = f"fields {claimed[entry.canonical_name]!r} and {f.raw_name!r} both map to {entry.canonical_name!r}"
        if problem is not None:
            report.conflicts.append(TypeConflict(problem))
            report.unmatched.append(f.raw_name)
            continue
        claimed[entry.canonical_name] = f.raw_name
        numeric = entry.value_type in (ValueType.REAL, ValueType.INTEGER)
        if numeric and (conv.factor != 1.0 or conv.offset != 0.0):
            columns[i] = [None if v is None else conv.apply(v) for v in columns[i]]
            value_type = ValueType.REAL
        else:
            value_type = entry.value_type
        if value_type is ValueType.REAL:
            columns[i] = [None if v is None else float(v) for v in columns[i]]
        schema[i] = replace(
            f,
            canonical_name=entry.canonical_name,
            value_type=value_type,
            unit=entry.unit,
            description=entry.description or f.description,
        )
        report.matched.append((f.raw_name, entry.canonical_name))
    rows = tuple(
        Feature(tuple(col[k] for col in columns), r.geometry) for k, r in enumerate(layer.rows)
    )
    out = replace(layer, schema=tuple(schema), rows=rows, standardized=not report.unmatched)
    return attach_metadata(out, {}), report


def _is_standardized(f: AttributeField, dictionary: AttributeDictionary | None) -> bool:
    if f.canonical_name is not None:
        return True
    if dictionary is None or f.raw_name not in dictionary:
        return False
    return unit_key(f.unit) == unit_key(dictionary.entries[f.raw_name].unit)


def standardization_ratio(layers: Iterable[Dataset], dictionary: AttributeDictionary | None = None) -> float:
    """Share of fields carrying a canonical name; 1.0 when there are no fields.

    With ``dictionary`` given, a field whose raw name and unit are already
    exactly canonical also counts.  This measures a raw corpus before any
    standardization pass has run.
    """
    fields = [f for layer in layers if isinstance(layer, FeatureLayer) for f in layer.schema]
    if not fields:
        return 1.0
    return sum(_is_standardized(f, dictionary) for f in fields) / len(fields)


def attach_metadata(obj: Dataset, entries: dict[str, object]) -> Dataset:
    """Merge ``entries`` into metadata (new values win) and mirror field descriptions."""
    for key in entries:
        if not str(key):
            raise DictionaryError("metadata keys must be nonempty")
    merged = {**obj.metadata, **{str(k): str(v) for k, v in entries.items()}}
    if isinstance(obj, FeatureLayer):
        for f in obj.schema:
            if f.canonical_name and f.description:
                merged[f"schema.{f.canonical_name}.description"] = f.description
        return replace(obj, metadata=merged)
    if isinstance(obj, RasterGrid):
        return replace(obj, metadata=merged)
    raise TypeError(f"cannot attach metadata to {type(obj).__name__}")


def one_hot(layer: FeatureLayer, column: str) -> FeatureLayer:
    """Append a 0/1 integer indicator per distinct value of ``column``."""
    idx = layer.column_index(column)
    src = layer.schema[idx]
    if src.value_type not in (ValueType.TEXT, ValueType.CATEGORICAL):
        raise TypeConflict(f"column {column!r} is {src.value_type.value}, not categorical or text")
    values = [r.values[idx] for r in layer.rows]
    distinct = {v for v in values if v is not None}
    if len(distinct) > MAX_CATEGORIES:
        raise CardinalityTooHigh(f"column {column!r} has {len(distinct)} distinct values (limit {MAX_CATEGORIES})")
    base = src.column_name
    taken = {f.column_name for f in layer.schema}
    names: dict[str, str] = {}
    for v in sorted(distinct, key=lambda v: (snake_case(v, prefix="v"), v)):
        name = f"{base}_{snake_case(v, prefix='v')}"
        k = 2
        while name in taken:
            name = f"{base}_{snake_case(v, prefix='v')}_{k}"
            k += 1
        taken.add(name)
        names[v] = name
    indicators = [
        AttributeField(
            raw_name=name,
            canonical_name=name if src.canonical_name else None,
            value_type=ValueType.INTEGER,
            description=f"1 when {base} is {v!r}, else 0",
        )
        for v, name in names.items()
    ]
    order = list(names)
    rows = tuple(
        Feature(r.values + tuple(int(v == cat) for cat in order), r.geometry)
        for r, v in zip(layer.rows, values)
    )
    nulls = sum(v is None for v in values)
    metadata = {**layer.metadata, f"one_hot.{base}.null_rows": str(nulls)}
    return replace(layer, schema=layer.schema + tuple(indicators), rows=rows, metadata=metadata)
