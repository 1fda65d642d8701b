"""Shared domain types: geometry, CRS definitions, layers, rasters, provenance.

All types are frozen after construction.  ``FeatureLayer`` validates its
rows on construction, so any layer that exists passes
:func:`validate_geometry` on every row.
"""

from __future__ import annotations

import datetime as dt
import math
import re
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Any, Iterator, NamedTuple, Sequence

import numpy as np

from argus.errors import InvalidGeometry, NoSuchColumn, SchemaError

IDENTIFIER_RE = re.compile(r"[a-z][a-z0-9_]*\Z")
SHA256_RE = re.compile(r"[0-9a-f]{64}\Z")


class GeometryKind(str, Enum):
    POINT = "point"
    MULTIPOINT = "multipoint"
    LINESTRING = "linestring"
    POLYGON = "polygon"
    MULTIPOLYGON = "multipolygon"


class ValueType(str, Enum):
    TEXT = "text"
    INTEGER = "integer"
    REAL = "real"
    BOOLEAN = "boolean"
    DATE = "date"
    CATEGORICAL = "categorical"


class CrsKind(str, Enum):
    GEOGRAPHIC = "geographic"
    TRANSVERSE_MERCATOR = "transverse_mercator"
    LAMBERT_AZIMUTHAL_EQUAL_AREA = "lambert_azimuthal_equal_area"


class Stage(str, Enum):
    INGEST = "ingest"
    STANDARDIZE = "standardize"
    ENRICH = "enrich"
    INTEGRATE = "integrate"
    QUERY = "query"
    PUBLISH = "publish"


def snake_case(name: str, prefix: str = "l") -> str:
    """Normalize ``name`` to an identifier matching ``[a-z][a-z0-9_]*``."""
    s = re.sub(r"[^a-z0-9]+", "_", name.strip().lower()).strip("_")
    if not s:
        return prefix
    if not s[0].isalpha():
        s = f"{prefix}_{s}"
    return s


# --------------------------------------------------------------------------
# geometry


def _pair(c: Any) -> tuple[float, float]:
    try:
        x, y = c
        return (float(x), float(y))
    except (TypeError, ValueError) as exc:
        raise InvalidGeometry(f"coordinate must be an (x, y) pair, got {c!r}") from exc


@dataclass(frozen=True)
class Geometry:
    """2D vector geometry.

    ``coordinates`` nesting depends on ``kind``: a single pair for points,
    a sequence of pairs for multipoints and linestrings, a sequence of rings
    for polygons and a sequence of polygons for multipolygons.
    """

    kind: GeometryKind
    coordinates: Any

    def __post_init__(self) -> None:
        kind = GeometryKind(self.kind)
        c = self.coordinates
        if kind is GeometryKind.POINT:
            norm: Any = _pair(c)
        elif kind in (GeometryKind.MULTIPOINT, GeometryKind.LINESTRING):
            norm = tuple(_pair(p) for p in c)
        elif kind is GeometryKind.POLYGON:
            norm = tuple(tuple(_pair(p) for p in ring) for ring in c)
        else:
            norm = tuple(tuple(tuple(_pair(p) for p in ring) for ring in poly) for poly in c)
        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "coordinates", norm)

    @classmethod
    def point(cls, x: float, y: float) -> Geometry:
        return cls(GeometryKind.POINT, (x, y))

    @classmethod
    def polygon(cls, *rings: Sequence[Sequence[float]]) -> Geometry:
        return cls(GeometryKind.POLYGON, rings)

    def vertices(self) -> list[tuple[float, float]]:
        k = self.kind
        if k is GeometryKind.POINT:
            return [self.coordinates]
        if k in (GeometryKind.MULTIPOINT, GeometryKind.LINESTRING):
            return list(self.coordinates)
        if k is GeometryKind.POLYGON:
            return [p for ring in self.coordinates for p in ring]
        return [p for poly in self.coordinates for ring in poly for p in ring]

    def bounds(self) -> tuple[float, float, float, float]:
        v = self.vertices()
        if not v:
            raise InvalidGeometry("empty geometry has no bounds")
        xs = [p[0] for p in v]
        ys = [p[1] for p in v]
        return (min(xs), min(ys), max(xs), max(ys))

    def map_vertices(self, fn) -> Geometry:
        """Return a copy with all vertices replaced by ``fn(xs, ys) -> (xs, ys)``.

        ``fn`` receives and returns numpy arrays so the transform runs once
        over every vertex of the geometry.
        """
        v = self.vertices()
        if not v:
            return self
        arr = np.asarray(v, dtype=float)
        nx, ny = fn(arr[:, 0], arr[:, 1])
        it = iter(zip(np.asarray(nx, dtype=float).tolist(), np.asarray(ny, dtype=float).tolist()))
        k = self.kind
        if k is GeometryKind.POINT:
            return Geometry(k, next(it))
        if k in (GeometryKind.MULTIPOINT, GeometryKind.LINESTRING):
            return Geometry(k, [next(it) for _ in self.coordinates])
        if k is GeometryKind.POLYGON:
            return Geometry(k, [[next(it) for _ in ring] for ring in self.coordinates])
        return Geometry(k, [[[next(it) for _ in ring] for ring in poly] for poly in self.coordinates])

    def polygons(self) -> list[tuple]:
        if self.kind is GeometryKind.POLYGON:
            return [self.coordinates]
        if self.kind is GeometryKind.MULTIPOLYGON:
            return list(self.coordinates)
        raise InvalidGeometry(f"{self.kind.value} is not areal")


def _check_vertices(points, label: str, out: list[str]) -> None:
    for i, (x, y) in enumerate(points):
        if not (math.isfinite(x) and math.isfinite(y)):
            out.append(f"nonfinite_coordinate@{label}v{i}")


def _check_polygon(rings, label: str, out: list[str]) -> None:
    if not rings:
        out.append(f"polygon_empty@{label}ring0")
    for r, ring in enumerate(rings):
        tag = f"{label}ring{r}"
        _check_vertices(ring, tag + ".", out)
        if len(ring) < 4:
            out.append(f"ring_too_short@{tag}")
        elif ring[0] != ring[-1]:
            out.append(f"ring_not_closed@{tag}.v{len(ring) - 1}")


def validate_geometry(g: Geometry) -> list[str]:
    """List every invariant violation of ``g`` as ``rule@location`` strings."""
    out: list[str] = []
    k = g.kind
    if k is GeometryKind.POINT:
        _check_vertices([g.coordinates], "", out)
    elif k is GeometryKind.MULTIPOINT:
        if not g.coordinates:
            out.append("multipoint_empty@v0")
        _check_vertices(g.coordinates, "", out)
    elif k is GeometryKind.LINESTRING:
        _check_vertices(g.coordinates, "", out)
        if len(g.coordinates) < 2:
            out.append(f"linestring_too_short@v{len(g.coordinates)}")
    elif k is GeometryKind.POLYGON:
        _check_polygon(g.coordinates, "", out)
    else:
        if not g.coordinates:
            out.append("multipolygon_empty@poly0")
        for p, poly in enumerate(g.coordinates):
            _check_polygon(poly, f"poly{p}.", out)
    return out


def points_in_polygon(xs, ys, polygon: Geometry) -> np.ndarray:
    """Even-odd containment test of many points against a (multi)polygon.

    Holes are honoured because each ring toggles parity.  Points exactly on
    an edge may land either side.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    inside = np.zeros(xs.shape, dtype=bool)
    for rings in polygon.polygons():
        poly_inside = np.zeros(xs.shape, dtype=bool)
        for ring in rings:
            r = np.asarray(ring, dtype=float)
            x1, y1 = r[:-1, 0], r[:-1, 1]
            x2, y2 = r[1:, 0], r[1:, 1]
            for a, b, c, d in zip(x1, y1, x2, y2):
                crosses = (b > ys) != (d > ys)
                with np.errstate(divide="ignore", invalid="ignore"):
                    xint = a + (ys - b) * (c - a) / (d - b)
                poly_inside ^= crosses & (xs < xint)
        inside |= poly_inside
    return inside


def point_on_boundary(x: float, y: float, polygon: Geometry, tol: float = 1e-12) -> bool:
    for rings in polygon.polygons():
        for ring in rings:
            for (a, b), (c, d) in zip(ring[:-1], ring[1:]):
                cross = (c - a) * (y - b) - (d - b) * (x - a)
                seg = math.hypot(c - a, d - b)
                if abs(cross) <= tol * max(seg, 1.0) and min(a, c) - tol <= x <= max(a, c) + tol and min(b, d) - tol <= y <= max(b, d) + tol:
                    return True
    return False


# --------------------------------------------------------------------------
# coordinate reference systems


@dataclass(frozen=True)
class Ellipsoid:
    semi_major_a: float
    inverse_flattening: float

    def __post_init__(self) -> None:
        if not self.semi_major_a > 0 or not self.inverse_flattening > 0:
            raise SchemaError("ellipsoid axes must be positive")

    @property
    def f(self) -> float:
        return 1.0 / self.inverse_flattening

    @property
    def b(self) -> float:
        return self.semi_major_a * (1.0 - self.f)

    @property
    def e2(self) -> float:
        return self.f * (2.0 - self.f)

    @property
    def e(self) -> float:
        return math.sqrt(self.e2)

    @property
    def n(self) -> float:
        """Third flattening."""
        return self.f / (2.0 - self.f)


@dataclass(frozen=True)
class Helmert:
    """Position-vector 7-parameter datum shift; rotations in arc-seconds."""

    dx: float = 0.0
    dy: float = 0.0
    dz: float = 0.0
    rx: float = 0.0
    ry: float = 0.0
    rz: float = 0.0
    scale_ppm: float = 0.0

    @property
    def is_identity(self) -> bool:
        return not any((self.dx, self.dy, self.dz, self.rx, self.ry, self.rz, self.scale_ppm))


@dataclass(frozen=True)
class ProjectionParams:
    lat_origin: float = 0.0
    lon_origin: float = 0.0
    scale_factor_k0: float = 1.0
    false_easting: float = 0.0
    false_northing: float = 0.0


IDENTITY_PROJECTION = ProjectionParams()


@dataclass(frozen=True)
class CrsDef:
    srs_id: int
    kind: CrsKind
    ellipsoid: Ellipsoid
    helmert_to_wgs84: Helmert = Helmert()
    projection_params: ProjectionParams = IDENTITY_PROJECTION
    name: str = ""
    wkt_aliases: tuple[str, ...] = ()
    definition: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", CrsKind(self.kind))
        object.__setattr__(self, "wkt_aliases", tuple(self.wkt_aliases))
        if self.kind is CrsKind.GEOGRAPHIC and self.projection_params != IDENTITY_PROJECTION:
            raise SchemaError("geographic CRS cannot carry projection parameters")

    @property
    def is_geographic(self) -> bool:
        return self.kind is CrsKind.GEOGRAPHIC


# --------------------------------------------------------------------------
# attributes and layers


@dataclass(frozen=True)
class AttributeField:
    raw_name: str
    canonical_name: str | None = None
    value_type: ValueType = ValueType.TEXT
    unit: str | None = None
    description: str | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "value_type", ValueType(self.value_type))
        if not self.raw_name:
            raise SchemaError("attribute raw_name must be nonempty")
        if self.canonical_name is not None and not IDENTIFIER_RE.match(self.canonical_name):
            raise SchemaError(f"canonical name {self.canonical_name!r} is not a snake_case identifier")

    @property
    def column_name(self) -> str:
        return self.canonical_name or snake_case(self.raw_name, prefix="f")


class Feature(NamedTuple):
    values: tuple
    geometry: Geometry | None


def coerce_cell(value: Any, value_type: ValueType) -> Any:
    """Check ``value`` against ``value_type``; ints widen to float for reals."""
    if value is None:
        return None
    if value_type in (ValueType.TEXT, ValueType.CATEGORICAL):
        ok = isinstance(value, str)
    elif value_type is ValueType.INTEGER:
        ok = isinstance(value, (int, np.integer)) and not isinstance(value, bool)
        value = int(value) if ok else value
    elif value_type is ValueType.REAL:
        ok = isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool)
        value = float(value) if ok else value
    elif value_type is ValueType.BOOLEAN:
        ok = isinstance(value, (bool, np.bool_))
        value = bool(value) if ok else value
    else:
        ok = isinstance(value, dt.date) and not isinstance(value, dt.datetime)
    if not ok:
        raise SchemaError(f"cell {value!r} does not match type {value_type.value}")
    return value


@dataclass(frozen=True)
class FeatureLayer:
    name: str
    crs: CrsDef
    schema: tuple[AttributeField, ...]
    rows: tuple[Feature, ...]
    metadata: dict[str, str] = field(default_factory=dict)
    standardized: bool = False

    def __post_init__(self) -> None:
        object.__setattr__(self, "name", snake_case(self.name))
        schema = tuple(self.schema)
        rows = []
        for i, row in enumerate(self.rows):
            values, geom = row
            if len(values) != len(schema):
                raise SchemaError(f"row {i} has {len(values)} cells, schema has {len(schema)}")
            try:
                cells = tuple(coerce_cell(v, f.value_type) for v, f in zip(values, schema))
            except SchemaError as exc:
                raise SchemaError(f"row {i}: {exc}") from None
            if geom is not None:
                problems = validate_geometry(geom)
                if problems:
                    raise InvalidGeometry(f"row {i}: {', '.join(problems)}")
            rows.append(Feature(cells, geom))
        names = [f.column_name for f in schema]
        dupes = {n for n in names if names.count(n) > 1}
        if dupes:
            raise SchemaError(f"duplicate column names: {sorted(dupes)}")
        object.__setattr__(self, "schema", schema)
        object.__setattr__(self, "rows", tuple(rows))
        object.__setattr__(self, "metadata", {str(k): str(v) for k, v in dict(self.metadata).items()})

    def __len__(self) -> int:
        return len(self.rows)

    def column_index(self, name: str) -> int:
        key = name.lower()
        for i, f in enumerate(self.schema):
            if key in (f.column_name, (f.canonical_name or "").lower(), f.raw_name.lower()):
                return i
        raise NoSuchColumn(f"layer {self.name!r} has no column {name!r}")

    def column(self, name: str) -> list:
        i = self.column_index(name)
        return [r.values[i] for r in self.rows]

    def with_name(self, name: str) -> FeatureLayer:
        return replace(self, name=name)


@dataclass(frozen=True, eq=False)
class RasterGrid:
    """Single-band grid; ``values[0]`` is the bottom (southernmost) row."""

    origin: tuple[float, float]
    cell_size: float
    ncols: int
    nrows: int
    nodata: float
    values: np.ndarray
    crs: CrsDef
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not self.cell_size > 0:
            raise SchemaError("cell_size must be positive")
        if self.ncols < 1 or self.nrows < 1:
            raise SchemaError("raster dimensions must be positive")
        arr = np.array(self.values, dtype=np.float64)
        if arr.size != self.nrows * self.ncols:
            raise SchemaError(f"{arr.size} values for a {self.nrows}x{self.ncols} grid")
        arr = arr.reshape(self.nrows, self.ncols)
        data = arr[~self._nodata_mask(arr)]
        if not np.all(np.isfinite(data)):
            raise SchemaError("raster holds non-finite values that are not nodata")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "origin", (float(self.origin[0]), float(self.origin[1])))
        object.__setattr__(self, "cell_size", float(self.cell_size))
        object.__setattr__(self, "nodata", float(self.nodata))
        object.__setattr__(self, "metadata", {str(k): str(v) for k, v in dict(self.metadata).items()})

    def _nodata_mask(self, arr: np.ndarray) -> np.ndarray:
        if math.isnan(self.nodata):
            return np.isnan(arr)
        return arr == self.nodata

    @property
    def valid_mask(self) -> np.ndarray:
        return ~self._nodata_mask(self.values)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        x0, y0 = self.origin
        return (x0, y0, x0 + self.ncols * self.cell_size, y0 + self.nrows * self.cell_size)

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Center coordinates as two (nrows, ncols) arrays."""
        x0, y0 = self.origin
        cx = x0 + (np.arange(self.ncols) + 0.5) * self.cell_size
        cy = y0 + (np.arange(self.nrows) + 0.5) * self.cell_size
        return np.meshgrid(cx, cy)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RasterGrid):
            return NotImplemented
        return (
            self.origin == other.origin
            and self.cell_size == other.cell_size
            and (self.ncols, self.nrows) == (other.ncols, other.nrows)
            and (self.nodata == other.nodata or (math.isnan(self.nodata) and math.isnan(other.nodata)))
            and self.crs == other.crs
            and self.metadata == other.metadata
            and np.array_equal(self.values, other.values, equal_nan=True)
        )

    __hash__ = None  # type: ignore[assignment]


Dataset = FeatureLayer | RasterGrid


@dataclass(frozen=True)
class SiteConfig:
    site_id: str
    centroid: tuple[float, float]
    boundary: Geometry

    def __post_init__(self) -> None:
        object.__setattr__(self, "centroid", (float(self.centroid[0]), float(self.centroid[1])))
        if self.boundary.kind not in (GeometryKind.POLYGON, GeometryKind.MULTIPOLYGON):
            raise InvalidGeometry("site boundary must be a polygon")
        problems = validate_geometry(self.boundary)
        if problems:
            raise InvalidGeometry(f"site boundary: {', '.join(problems)}")
        x, y = self.centroid
        if not (points_in_polygon([x], [y], self.boundary)[0] or point_on_boundary(x, y, self.boundary)):
            raise InvalidGeometry(f"centroid {self.centroid} lies outside the site boundary")


# --------------------------------------------------------------------------
# provenance


def utc_now() -> dt.datetime:
    return dt.datetime.now(dt.timezone.utc)


@dataclass(frozen=True)
class ProvenanceRecord:
    input_id: str
    sha256: str
    stage: Stage
    started: dt.datetime
    finished: dt.datetime
    parameters: dict[str, Any] = field(default_factory=dict)
    tool_version: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "stage", Stage(self.stage))
        if not SHA256_RE.match(self.sha256):
            raise SchemaError(f"not a lowercase sha256 digest: {self.sha256!r}")
        if self.finished < self.started:
            raise SchemaError("provenance record finishes before it starts")

    def to_dict(self) -> dict[str, Any]:
        return {
            "input_id": self.input_id,
            "sha256": self.sha256,
            "stage": self.stage.value,
            "started": self.started.isoformat(),
            "finished": self.finished.isoformat(),
            "parameters": self.parameters,
            "tool_version": self.tool_version,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> ProvenanceRecord:
        return cls(
            input_id=d["input_id"],
            sha256=d["sha256"],
            stage=Stage(d["stage"]),
            started=dt.datetime.fromisoformat(d["started"]),
            finished=dt.datetime.fromisoformat(d["finished"]),
            parameters=dict(d.get("parameters", {})),
            tool_version=d.get("tool_version", ""),
        )


def iter_layers(datasets: dict[str, Dataset]) -> Iterator[FeatureLayer]:
    for d in datasets.values():
        if isinstance(d, FeatureLayer):
            yield d
