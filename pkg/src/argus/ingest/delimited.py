"""Delimited text (CSV and friends) and free-text extraction into feature layers."""

from __future__ import annotations

import csv
import datetime as dt
import io
import re
from dataclasses import dataclass, field

from argus.crs.registry import WGS84
from argus.errors import EmptyInput, InvalidPattern, NoSuchColumn, NonNumericCell, RaggedRow
from argus.model import AttributeField, Feature, FeatureLayer, Geometry, SiteConfig, ValueType

DELIMITERS = (",", ";", "\t")
SNIFF_ROWS = 10
LON_NAMES = ("lon", "longitude", "long", "lng", "x_wgs84")
LAT_NAMES = ("lat", "latitude", "y_wgs84")
UNIT_RE = re.compile(r"^(?P<name>.*?)\s*[\[(](?P<unit>[^\])]+)[\])]\s*$")
DATE_RE = re.compile(r"\d{4}-\d{2}-\d{2}\Z")


def sniff_delimiter(text: str) -> str:
    """Pick the delimiter whose first rows agree most often with the header width."""
    head = text.splitlines()[: SNIFF_ROWS]
    best, best_score = ",", -1
    for delim in DELIMITERS:
        rows = list(csv.reader(head, delimiter=delim))
        if not rows or len(rows[0]) < 2:
            continue
        width = len(rows[0])
        score = sum(1 for r in rows if len(r) == width)
        if score > best_score:
            best, best_score = delim, score
    return best


def split_unit(header: str) -> tuple[str, str | None]:
    """``"ws [km/h]"`` -> ``("ws", "km/h")``."""
    m = UNIT_RE.match(header.strip())
    if m and m.group("name"):
        return m.group("name").strip(), m.group("unit").strip()
    return header.strip(), None


def _parse_bool(s: str) -> bool | None:
    low = s.lower()
    if low in ("true", "yes"):
        return True
    if low in ("false", "no"):
        return False
    return None


def infer_type(cells: list[str]) -> ValueType:
    present = [c for c in cells if c != ""]
    if not present:
        return ValueType.TEXT
    try:
        for c in present:
            int(c)
        return ValueType.INTEGER
    except ValueError:
        pass
    try:
        for c in present:
            float(c)
        return ValueType.REAL
    except ValueError:
        pass
    if all(_parse_bool(c) is not None for c in present):
        return ValueType.BOOLEAN
    if all(DATE_RE.match(c) for c in present):
        try:
            for c in present:
                dt.date.fromisoformat(c)
            return ValueType.DATE
        except ValueError:
            pass
    return ValueType.TEXT


def convert(cell: str, vtype: ValueType):
    if cell == "":
        return None
    if vtype is ValueType.INTEGER:
        return int(cell)
    if vtype is ValueType.REAL:
        return float(cell)
    if vtype is ValueType.BOOLEAN:
        return _parse_bool(cell)
    if vtype is ValueType.DATE:
        return dt.date.fromisoformat(cell)
    return cell


def _find(names: list[str], wanted: str | None, candidates: tuple[str, ...]) -> int | None:
    lowered = [n.lower() for n in names]
    if wanted is not None:
        if wanted.lower() not in lowered:
            raise NoSuchColumn(f"coordinate column {wanted!r} not in header")
        return lowered.index(wanted.lower())
    for c in candidates:
        if c in lowered:
            return lowered.index(c)
    return None


def read_csv(
    data: bytes | str,
    site: SiteConfig | None = None,
    lon_col: str | None = None,
    lat_col: str | None = None,
    name: str = "table",
    encoding: str = "utf-8",
) -> FeatureLayer:
    """Read delimited text; rows get WGS84 points from lon/lat columns or,
    when there are none, the site centroid."""
    text = data.decode(encoding) if isinstance(data, bytes) else data
    text = text.lstrip("\ufeff")
    if not text.strip():
        raise EmptyInput("delimited input is empty")
    delim = sniff_delimiter(text)
    rows = list(csv.reader(io.StringIO(text), delimiter=delim))
    while rows and not any(c.strip() for c in rows[-1]):
        rows.pop()
    header = [h for h in rows[0]]
    width = len(header)
    body = []
    for i, r in enumerate(rows[1:], start=1):
        if not any(c.strip() for c in r):
            continue
        if len(r) != width:
            raise RaggedRow(i, width, len(r))
        body.append([c.strip() for c in r])
    names_units = [split_unit(h) for h in header]
    names = [n for n, _ in names_units]
    ilon = _find(names, lon_col, LON_NAMES)
    ilat = _find(names, lat_col, LAT_NAMES)
    columns = list(zip(*body)) if body else [() for _ in header]
    types = [infer_type(list(col)) for col in columns]
    schema = tuple(
        AttributeField(raw_name=n, value_type=t, unit=u) for (n, u), t in zip(names_units, types)
    )
    metadata = {"source_format": "csv", "delimiter": delim}
    geocode = ilon is None or ilat is None
    if geocode:
        if site is None:
            raise EmptyInput("table has no lon/lat columns and no site centroid was given to geocode it")
        metadata["geocoded"] = "site_centroid"
        metadata["site_id"] = site.site_id
    features = []
    for i, r in enumerate(body, start=1):
        values = tuple(convert(c, t) for c, t in zip(r, types))
        if geocode:
            geom = Geometry.point(*site.centroid)
        elif r[ilon] == "" or r[ilat] == "":
            geom = None
        else:
            try:
                geom = Geometry.point(float(r[ilon]), float(r[ilat]))
            except ValueError:
                raise NonNumericCell(f"row {i}: coordinates {r[ilon]!r}, {r[ilat]!r} are not numbers") from None
        features.append(Feature(values, geom))
    return FeatureLayer(name=name, crs=WGS84, schema=schema, rows=tuple(features), metadata=metadata)


@dataclass(frozen=True)
class ExtractionPattern:
    field_name: str
    regex: str
    value_type: ValueType = ValueType.REAL
    unit: str | None = None


@dataclass
class ExtractionResult:
    layer: FeatureLayer
    skipped: list[tuple[int, str]] = field(default_factory=list)

    @property
    def skipped_count(self) -> int:
        return len(self.skipped)


def extract_structured(
    txt: str,
    patterns: list[ExtractionPattern] | list[tuple],
    site: SiteConfig | None = None,
    name: str = "extracted",
) -> ExtractionResult:
    """One row per line matching every pattern; other nonblank lines are reported as skipped."""
    if not patterns:
        raise InvalidPattern("at least one pattern is required")
    pats = [p if isinstance(p, ExtractionPattern) else ExtractionPattern(*p) for p in patterns]
    compiled = []
    for p in pats:
        try:
            rx = re.compile(p.regex)
        except re.error as exc:
            raise InvalidPattern(f"pattern for {p.field_name!r} does not compile: {exc}") from None
        if rx.groups != 1:
            raise InvalidPattern(f"pattern for {p.field_name!r} must have exactly one capture group, has {rx.groups}")
        compiled.append((rx, ValueType(p.value_type)))
    schema = tuple(AttributeField(raw_name=p.field_name, value_type=p.value_type, unit=p.unit) for p in pats)
    features = []
    skipped = []
    for lineno, line in enumerate(txt.splitlines(), start=1):
        if not line.strip():
            continue
        matches = [rx.search(line) for rx, _ in compiled]
        if not all(matches):
            skipped.append((lineno, line))
            continue
        try:
            values = tuple(convert(m.group(1).strip(), t) for m, (_, t) in zip(matches, compiled))
        except ValueError:
            skipped.append((lineno, line))
            continue
        geom = Geometry.point(*site.centroid) if site is not None else None
        features.append(Feature(values, geom))
    metadata = {"source_format": "txt", "skipped_lines": str(len(skipped))}
    if site is not None:
        metadata["geocoded"] = "site_centroid"
        metadata["site_id"] = site.site_id
    layer = FeatureLayer(name=name, crs=WGS84, schema=schema, rows=tuple(features), metadata=metadata)
    return ExtractionResult(layer, skipped)
