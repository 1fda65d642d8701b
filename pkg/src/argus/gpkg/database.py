"""Single-file GeoPackage container holding every integrated dataset."""

from __future__ import annotations

import datetime as dt
import hashlib
import json
import math
import sqlite3
import xml.etree.ElementTree as ET
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from argus.crs.registry import REGISTRY
from argus.errors import (
    CorruptSidecar,
    DuplicateLayer,
    IoFailure,
    NoSuchLayer,
    PathExists,
    UnsupportedType,
)
from argus.gpkg.geometry import TYPE_NAMES, encode_blob, parse_blob
from argus.ingest.asciigrid import read_ascii_grid, write_ascii_grid
from argus.model import (
    AttributeField,
    CrsDef,
    Feature,
    FeatureLayer,
    ProvenanceRecord,
    RasterGrid,
    ValueType,
    snake_case,
    utc_now,
)

APPLICATION_ID = 0x47504B47  # "GPKG"
USER_VERSION = 10300
FID = "fid"
GEOM = "geom"
METADATA_URI = "urn:argus:metadata:key-value"
METADATA_EXTENSION = "http://www.geopackage.org/spec/#extension_metadata"

SQL_TYPES = {
    ValueType.TEXT: "TEXT",
    ValueType.CATEGORICAL: "TEXT",
    ValueType.INTEGER: "INTEGER",
    ValueType.REAL: "DOUBLE",
    ValueType.BOOLEAN: "BOOLEAN",
    ValueType.DATE: "DATE",
}

SCHEMA = """
CREATE TABLE gpkg_spatial_ref_sys (
  srs_name TEXT NOT NULL,
  srs_id INTEGER NOT NULL PRIMARY KEY,
  organization TEXT NOT NULL,
  organization_coordsys_id INTEGER NOT NULL,
  definition TEXT NOT NULL,
  description TEXT
);
CREATE TABLE gpkg_contents (
  table_name TEXT NOT NULL PRIMARY KEY,
  data_type TEXT NOT NULL,
  identifier TEXT UNIQUE,
  description TEXT DEFAULT '',
  last_change DATETIME NOT NULL DEFAULT (strftime('%Y-%m-%dT%H:%M:%fZ','now')),
  min_x DOUBLE, min_y DOUBLE, max_x DOUBLE, max_y DOUBLE,
  srs_id INTEGER,
  CONSTRAINT fk_gc_r_srs_id FOREIGN KEY (srs_id) REFERENCES gpkg_spatial_ref_sys(srs_id)
);
CREATE TABLE gpkg_geometry_columns (
  table_name TEXT NOT NULL,
  column_name TEXT NOT NULL,
  geometry_type_name TEXT NOT NULL,
  srs_id INTEGER NOT NULL,
  z TINYINT NOT NULL,
  m TINYINT NOT NULL,
  CONSTRAINT pk_geom_cols PRIMARY KEY (table_name, column_name),
  CONSTRAINT uk_gc_table_name UNIQUE (table_name),
  CONSTRAINT fk_gc_tn FOREIGN KEY (table_name) REFERENCES gpkg_contents(table_name),
  CONSTRAINT fk_gc_srs FOREIGN KEY (srs_id) REFERENCES gpkg_spatial_ref_sys (srs_id)
);
CREATE TABLE gpkg_extensions (
  table_name TEXT,
  column_name TEXT,
  extension_name TEXT NOT NULL,
  definition TEXT NOT NULL,
  scope TEXT NOT NULL,
  CONSTRAINT ge_tce UNIQUE (table_name, column_name, extension_name)
);
CREATE TABLE gpkg_metadata (
  id INTEGER CONSTRAINT m_pk PRIMARY KEY ASC NOT NULL,
  md_scope TEXT NOT NULL DEFAULT 'dataset',
  md_standard_uri TEXT NOT NULL,
  mime_type TEXT NOT NULL DEFAULT 'text/xml',
  metadata TEXT NOT NULL DEFAULT ''
);
CREATE TABLE gpkg_metadata_reference (
  reference_scope TEXT NOT NULL,
  table_name TEXT,
  column_name TEXT,
  row_id_value INTEGER,
  timestamp DATETIME NOT NULL DEFAULT (strftime('%Y-%m-%dT%H:%M:%fZ','now')),
  md_file_id INTEGER NOT NULL,
  md_parent_id INTEGER,
  CONSTRAINT crmr_mfi_fk FOREIGN KEY (md_file_id) REFERENCES gpkg_metadata(id),
  CONSTRAINT crmr_mpi_fk FOREIGN KEY (md_parent_id) REFERENCES gpkg_metadata(id)
);
CREATE TABLE argus_layers (
  table_name TEXT NOT NULL PRIMARY KEY,
  standardized BOOLEAN NOT NULL,
  metadata TEXT NOT NULL,
  CONSTRAINT fk_al_tn FOREIGN KEY (table_name) REFERENCES gpkg_contents(table_name)
);
CREATE TABLE argus_fields (
  table_name TEXT NOT NULL,
  ordinal INTEGER NOT NULL,
  column_name TEXT NOT NULL,
  raw_name TEXT NOT NULL,
  canonical_name TEXT,
  value_type TEXT NOT NULL,
  unit TEXT,
  description TEXT,
  CONSTRAINT pk_af PRIMARY KEY (table_name, ordinal),
  CONSTRAINT fk_af_tn FOREIGN KEY (table_name) REFERENCES gpkg_contents(table_name)
);
CREATE TABLE argus_rasters (
  table_name TEXT NOT NULL PRIMARY KEY,
  path TEXT NOT NULL,
  srs_id INTEGER NOT NULL,
  min_x DOUBLE NOT NULL, min_y DOUBLE NOT NULL, max_x DOUBLE NOT NULL, max_y DOUBLE NOT NULL,
  cell_size DOUBLE NOT NULL,
  ncols INTEGER NOT NULL,
  nrows INTEGER NOT NULL,
  nodata DOUBLE,
  sha256 TEXT NOT NULL,
  metadata TEXT NOT NULL,
  CONSTRAINT fk_ar_tn FOREIGN KEY (table_name) REFERENCES gpkg_contents(table_name),
  CONSTRAINT fk_ar_srs FOREIGN KEY (srs_id) REFERENCES gpkg_spatial_ref_sys(srs_id)
);
CREATE TABLE argus_provenance (
  id INTEGER PRIMARY KEY,
  input_id TEXT NOT NULL,
  sha256 TEXT NOT NULL,
  stage TEXT NOT NULL,
  started TEXT NOT NULL,
  finished TEXT NOT NULL,
  parameters TEXT NOT NULL,
  tool_version TEXT NOT NULL
);
"""

# Tables and columns whose content depends on wall-clock time.
TIMESTAMP_COLUMNS = {
    "gpkg_contents": ("last_change",),
    "gpkg_metadata_reference": ("timestamp",),
    "argus_provenance": ("started", "finished"),
}

REQUIRED_TABLES = ("gpkg_spatial_ref_sys", "gpkg_contents", "gpkg_geometry_columns")


def _iso(ts: dt.datetime) -> str:
    return ts.astimezone(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.") + f"{ts.microsecond // 1000:03d}Z"


def quote_ident(name: str) -> str:
    return '"' + name.replace('"', '""') + '"'


@dataclass(frozen=True)
class LayerSummary:
    name: str
    kind: str  # "vector" or "raster_sidecar"
    srs_id: int | None
    bbox: tuple[float, float, float, float] | None
    row_count: int


def _srs_rows() -> list[tuple]:
    rows = [
        ("Undefined cartesian SRS", -1, "NONE", -1, "undefined", "undefined cartesian coordinate reference system"),
        ("Undefined geographic SRS", 0, "NONE", 0, "undefined", "undefined geographic coordinate reference system"),
    ]
    for crs in REGISTRY:
        rows.append((crs.name, crs.srs_id, "EPSG", crs.srs_id, crs.definition, crs.name))
    return rows


def _encode_cell(v, vtype: ValueType, column: str):
    if v is None:
        return None
    if vtype is ValueType.REAL and math.isnan(v):
        raise UnsupportedType(f"column {column!r}: NaN cannot be stored (SQLite reads it back as NULL)")
    if vtype is ValueType.BOOLEAN:
        return int(v)
    if vtype is ValueType.DATE:
        return v.isoformat()
    return v


def _decode_cell(v, vtype: ValueType):
    if v is None:
        return None
    if vtype is ValueType.BOOLEAN:
        return bool(v)
    if vtype is ValueType.DATE:
        return dt.date.fromisoformat(v)
    if vtype is ValueType.REAL:
        return float(v)
    return v


def _type_from_sql(decl: str) -> ValueType:
    d = (decl or "").upper()
    if d in ("BOOLEAN",):
        return ValueType.BOOLEAN
    if d == "DATE":
        return ValueType.DATE
    if "INT" in d:
        return ValueType.INTEGER
    if d in ("REAL", "DOUBLE", "FLOAT") or "DOUBLE" in d or "FLOA" in d:
        return ValueType.REAL
    return ValueType.TEXT


class GpkgDatabase:
    """Handle on one GeoPackage file.  Mutations go through this single writer."""

    def __init__(self, path: str | Path, conn: sqlite3.Connection, timestamp: dt.datetime | None = None) -> None:
        self.path = Path(path)
        self.conn = conn
        self.timestamp = timestamp

    # -- lifecycle

    def __enter__(self) -> GpkgDatabase:
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def close(self) -> None:
        self.conn.close()

    def _now(self) -> str:
        return _iso(self.timestamp or utc_now())

    # -- catalogue

    def _contents(self, name: str):
        return self.conn.execute(
            "SELECT data_type, srs_id, min_x, min_y, max_x, max_y FROM gpkg_contents WHERE table_name = ?", (name,)
        ).fetchone()

    def has_layer(self, name: str) -> bool:
        return self._contents(name) is not None

    def list_layers(self) -> list[LayerSummary]:
        rasters = {r[0] for r in self.conn.execute("SELECT table_name FROM argus_rasters")} if self._has_table("argus_rasters") else set()
        out = []
        for name, dtype, srs, x0, y0, x1, y1 in self.conn.execute(
            "SELECT table_name, data_type, srs_id, min_x, min_y, max_x, max_y FROM gpkg_contents ORDER BY table_name"
        ):
            bbox = None if x0 is None else (x0, y0, x1, y1)
            if name in rasters:
                out.append(LayerSummary(name, "raster_sidecar", srs, bbox, 1))
            elif dtype == "features":
                (n,) = self.conn.execute(f"SELECT COUNT(*) FROM {quote_ident(name)}").fetchone()
                out.append(LayerSummary(name, "vector", srs, bbox, n))
        return out

    def _has_table(self, name: str) -> bool:
        return self.conn.execute("SELECT 1 FROM sqlite_master WHERE type='table' AND name=?", (name,)).fetchone() is not None

    def _claim(self, name: str) -> str:
        clean = snake_case(name)
        if self.has_layer(clean) or self._has_table(clean):
            raise DuplicateLayer(f"layer {clean!r} already exists")
        return clean

    def _register_srs(self, crs: CrsDef) -> None:
        self.conn.execute(
            "INSERT OR IGNORE INTO gpkg_spatial_ref_sys VALUES (?, ?, 'EPSG', ?, ?, ?)",
            (crs.name, crs.srs_id, crs.srs_id, crs.definition or "undefined", crs.name),
        )

    # -- vector layers

    def write_layer(self, layer: FeatureLayer, description: str = "") -> LayerSummary:
        name = self._claim(layer.name)
        columns = [f.column_name for f in layer.schema]
        for c in columns:
            if c in (FID, GEOM):
                raise UnsupportedType(f"attribute column {c!r} collides with a reserved GeoPackage column")
        kinds = {r.geometry.kind for r in layer.rows if r.geometry is not None}
        geom_type = TYPE_NAMES[next(iter(kinds))] if len(kinds) == 1 else "GEOMETRY"
        srs = layer.crs.srs_id
        bounds = [r.geometry.bounds() for r in layer.rows if r.geometry is not None]
        bbox = (
            (min(b[0] for b in bounds), min(b[1] for b in bounds), max(b[2] for b in bounds), max(b[3] for b in bounds))
            if bounds
            else (None, None, None, None)
        )
        rows = []
        for r in layer.rows:
            cells = [_encode_cell(v, f.value_type, c) for v, f, c in zip(r.values, layer.schema, columns)]
            blob = encode_blob(r.geometry, srs) if r.geometry is not None else None
            rows.append((blob, *cells))
        defs = ", ".join(f"{quote_ident(c)} {SQL_TYPES[f.value_type]}" for c, f in zip(columns, layer.schema))
        with self.conn:
            self._register_srs(layer.crs)
            self.conn.execute(
                f"CREATE TABLE {quote_ident(name)} ({FID} INTEGER PRIMARY KEY AUTOINCREMENT NOT NULL, {GEOM} {geom_type}"
                + (f", {defs}" if defs else "")
                + ")"
            )
            self.conn.execute(
                "INSERT INTO gpkg_contents VALUES (?, 'features', ?, ?, ?, ?, ?, ?, ?, ?)",
                (name, name, description, self._now(), *bbox, srs),
            )
            self.conn.execute("INSERT INTO gpkg_geometry_columns VALUES (?, ?, ?, ?, 0, 0)", (name, GEOM, geom_type, srs))
            marks = ", ".join("?" * (len(columns) + 1))
            cols = ", ".join([GEOM, *map(quote_ident, columns)])
            self.conn.executemany(f"INSERT INTO {quote_ident(name)} ({cols}) VALUES ({marks})", rows)
            self.conn.executemany(
                "INSERT INTO argus_fields VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                [
                    (name, i, c, f.raw_name, f.canonical_name, f.value_type.value, f.unit, f.description)
                    for i, (c, f) in enumerate(zip(columns, layer.schema))
                ],
            )
            self.conn.execute(
                "INSERT INTO argus_layers VALUES (?, ?, ?)",
                (name, int(layer.standardized), json.dumps(layer.metadata, sort_keys=True)),
            )
        return LayerSummary(name, "vector", srs, None if bbox[0] is None else bbox, len(rows))

    def schema_for(self, name: str) -> tuple[list[str], list[AttributeField]]:
        if self._has_table("argus_fields"):
            rows = self.conn.execute(
                "SELECT column_name, raw_name, canonical_name, value_type, unit, description "
                "FROM argus_fields WHERE table_name = ? ORDER BY ordinal",
                (name,),
            ).fetchall()
            if rows or self._has_table("argus_layers") and self.conn.execute(
                "SELECT 1 FROM argus_layers WHERE table_name = ?", (name,)
            ).fetchone():
                return [r[0] for r in rows], [AttributeField(r[1], r[2], ValueType(r[3]), r[4], r[5]) for r in rows]
        # a table written by another tool: fall back to declared column types
        geom_col = self.conn.execute(
            "SELECT column_name FROM gpkg_geometry_columns WHERE table_name = ?", (name,)
        ).fetchone()
        skip = {geom_col[0].lower()} if geom_col else set()
        columns, fields = [], []
        for _cid, col, decl, _nn, _dflt, pk in self.conn.execute(f"PRAGMA table_info({quote_ident(name)})"):
            if pk or col.lower() in skip:
                continue
            columns.append(col)
            fields.append(AttributeField(col, None, _type_from_sql(decl)))
        return columns, fields

    def read_layer(self, name: str) -> FeatureLayer:
        info = self._contents(name)
        if info is None or info[0] != "features":
            raise NoSuchLayer(f"no vector layer named {name!r}")
        geom_col, srs = self.conn.execute(
            "SELECT column_name, srs_id FROM gpkg_geometry_columns WHERE table_name = ?", (name,)
        ).fetchone()
        columns, schema = self.schema_for(name)
        pk = next(
            (c for _, c, _, _, _, p in self.conn.execute(f"PRAGMA table_info({quote_ident(name)})") if p), None
        )
        order = f" ORDER BY {quote_ident(pk)}" if pk else ""
        select = ", ".join([quote_ident(geom_col), *map(quote_ident, columns)])
        rows = []
        for rec in self.conn.execute(f"SELECT {select} FROM {quote_ident(name)}{order}"):
            blob = rec[0]
            geom = parse_blob(blob)[2] if blob is not None else None
            values = tuple(_decode_cell(v, f.value_type) for v, f in zip(rec[1:], schema))
            rows.append(Feature(values, geom))
        standardized, metadata = False, {}
        if self._has_table("argus_layers"):
            meta = self.conn.execute("SELECT standardized, metadata FROM argus_layers WHERE table_name = ?", (name,)).fetchone()
            if meta:
                standardized, metadata = bool(meta[0]), json.loads(meta[1])
        return FeatureLayer(name, REGISTRY.get(srs), tuple(schema), tuple(rows), metadata, standardized)

    # -- rasters

    def sidecar_path(self, name: str) -> Path:
        return self.path.with_name(f"{self.path.stem}_{name}.asc")

    def register_raster_sidecar(self, grid: RasterGrid, name: str, description: str = "") -> LayerSummary:
        name = self._claim(name)
        data = write_ascii_grid(grid)
        path = self.sidecar_path(name)
        try:
            path.write_bytes(data)
        except OSError as exc:
            raise IoFailure(f"cannot write raster sidecar {path}: {exc.strerror or exc}") from exc
        digest = hashlib.sha256(data).hexdigest()
        bbox = grid.bounds
        valid = grid.values[grid.valid_mask]
        stats = (float(valid.min()), float(valid.max()), float(valid.mean())) if valid.size else (None, None, None)
        with self.conn:
            self._register_srs(grid.crs)
            # an attributes table keeps the gpkg_contents row pointing at a real table
            self.conn.execute(
                f"CREATE TABLE {quote_ident(name)} (id INTEGER PRIMARY KEY AUTOINCREMENT NOT NULL, sidecar TEXT NOT NULL, "
                "ncols INTEGER, nrows INTEGER, cell_size DOUBLE, valid_cells INTEGER, "
                "min_value DOUBLE, max_value DOUBLE, mean_value DOUBLE)"
            )
            self.conn.execute(
                f"INSERT INTO {quote_ident(name)} (sidecar, ncols, nrows, cell_size, valid_cells, min_value, max_value, mean_value) "
                "VALUES (?, ?, ?, ?, ?, ?, ?, ?)",
                (path.name, grid.ncols, grid.nrows, grid.cell_size, int(valid.size), *stats),
            )
            self.conn.execute(
                "INSERT INTO gpkg_contents VALUES (?, 'attributes', ?, ?, ?, ?, ?, ?, ?, ?)",
                (name, name, description, self._now(), *bbox, grid.crs.srs_id),
            )
            self.conn.execute(
                "INSERT INTO argus_rasters VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?, ?)",
                (name, path.name, grid.crs.srs_id, *bbox, grid.cell_size, grid.ncols, grid.nrows,
                 None if math.isnan(grid.nodata) else grid.nodata, digest,
                 json.dumps(grid.metadata, sort_keys=True)),
            )
        return LayerSummary(name, "raster_sidecar", grid.crs.srs_id, bbox, 1)

    def read_raster(self, name: str) -> RasterGrid:
        row = self.conn.execute(
            "SELECT path, srs_id, sha256, metadata FROM argus_rasters WHERE table_name = ?", (name,)
        ).fetchone()
        if row is None:
            raise NoSuchLayer(f"no raster named {name!r}")
        rel, srs, digest, meta = row
        path = self.path.with_name(rel)
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise CorruptSidecar(f"raster sidecar {path.name} is unreadable: {exc.strerror or exc}") from exc
        if hashlib.sha256(data).hexdigest() != digest:
            raise CorruptSidecar(f"raster sidecar {path.name} does not match its recorded checksum")
        grid = read_ascii_grid(data, srs)
        return RasterGrid(grid.origin, grid.cell_size, grid.ncols, grid.nrows, grid.nodata, grid.values,
                          grid.crs, json.loads(meta))

    def raster_names(self) -> list[str]:
        return [r[0] for r in self.conn.execute("SELECT table_name FROM argus_rasters ORDER BY table_name")]

    # -- metadata

    def write_metadata(self, layer_name: str, entries: dict[str, object]) -> int:
        if not self.has_layer(layer_name):
            raise NoSuchLayer(f"no layer named {layer_name!r}")
        root = ET.Element("metadata", {"layer": layer_name})
        for key in sorted(entries):
            ET.SubElement(root, "entry", {"key": str(key)}).text = str(entries[key])
        payload = ET.tostring(root, encoding="unicode")
        with self.conn:
            self.conn.execute(
                "INSERT OR IGNORE INTO gpkg_extensions VALUES ('gpkg_metadata', NULL, 'gpkg_metadata', ?, 'read-write')",
                (METADATA_EXTENSION,),
            )
            self.conn.execute(
                "INSERT OR IGNORE INTO gpkg_extensions VALUES ('gpkg_metadata_reference', NULL, 'gpkg_metadata', ?, 'read-write')",
                (METADATA_EXTENSION,),
            )
            cur = self.conn.execute(
                "INSERT INTO gpkg_metadata (md_scope, md_standard_uri, mime_type, metadata) VALUES ('dataset', ?, 'text/xml', ?)",
                (METADATA_URI, payload),
            )
            self.conn.execute(
                "INSERT INTO gpkg_metadata_reference VALUES ('table', ?, NULL, NULL, ?, ?, NULL)",
                (layer_name, self._now(), cur.lastrowid),
            )
        return cur.lastrowid

    def read_metadata(self, layer_name: str) -> dict[str, str]:
        if not self.has_layer(layer_name):
            raise NoSuchLayer(f"no layer named {layer_name!r}")
        out: dict[str, str] = {}
        for (payload,) in self.conn.execute(
            "SELECT m.metadata FROM gpkg_metadata_reference r JOIN gpkg_metadata m ON m.id = r.md_file_id "
            "WHERE r.reference_scope = 'table' AND r.table_name = ? ORDER BY m.id",
            (layer_name,),
        ):
            for e in ET.fromstring(payload).iter("entry"):
                out[e.get("key")] = e.text or ""
        return out

    # -- provenance

    def write_provenance(self, records: Iterable[ProvenanceRecord]) -> None:
        with self.conn:
            self.conn.executemany(
                "INSERT INTO argus_provenance (input_id, sha256, stage, started, finished, parameters, tool_version) "
                "VALUES (?, ?, ?, ?, ?, ?, ?)",
                [
                    (r.input_id, r.sha256, r.stage.value, r.started.isoformat(), r.finished.isoformat(),
                     json.dumps(r.parameters, sort_keys=True), r.tool_version)
                    for r in records
                ],
            )

    def read_provenance(self) -> list[ProvenanceRecord]:
        return [
            ProvenanceRecord.from_dict(
                {"input_id": a, "sha256": b, "stage": c, "started": d, "finished": e,
                 "parameters": json.loads(f), "tool_version": g}
            )
            for a, b, c, d, e, f, g in self.conn.execute(
                "SELECT input_id, sha256, stage, started, finished, parameters, tool_version FROM argus_provenance ORDER BY id"
            )
        ]

    # -- comparison

    def content_digest(self, exclude_timestamps: bool = True) -> str:
        """Hash of every table's rows in primary-key order, for determinism checks."""
        h = hashlib.sha256()
        tables = [r[0] for r in self.conn.execute(
            "SELECT name FROM sqlite_master WHERE type='table' AND name NOT LIKE 'sqlite_%' ORDER BY name")]
        for t in tables:
            cols = [r[1] for r in self.conn.execute(f"PRAGMA table_info({quote_ident(t)})")]
            if exclude_timestamps:
                cols = [c for c in cols if c not in TIMESTAMP_COLUMNS.get(t, ())]
            if not cols:
                continue
            sel = ", ".join(map(quote_ident, cols))
            h.update(f"\x00{t}\x00{','.join(cols)}\x00".encode())
            for row in self.conn.execute(f"SELECT {sel} FROM {quote_ident(t)} ORDER BY {sel}"):
                h.update(repr(row).encode())
        return h.hexdigest()


def create_database(path: str | Path, overwrite: bool = False, timestamp: dt.datetime | None = None) -> GpkgDatabase:
    path = Path(path)
    if path.exists():
        if not overwrite:
            raise PathExists(f"{path} already exists")
        path.unlink()
    try:
        conn = sqlite3.connect(path)
    except sqlite3.Error as exc:
        raise IoFailure(f"cannot create {path}: {exc}") from exc
    conn.execute(f"PRAGMA application_id = {APPLICATION_ID}")
    conn.execute(f"PRAGMA user_version = {USER_VERSION}")
    conn.execute("PRAGMA foreign_keys = ON")
    with conn:
        conn.executescript(SCHEMA)
        conn.executemany("INSERT INTO gpkg_spatial_ref_sys VALUES (?, ?, ?, ?, ?, ?)", _srs_rows())
    return GpkgDatabase(path, conn, timestamp)


def open_database(path: str | Path, timestamp: dt.datetime | None = None) -> GpkgDatabase:
    path = Path(path)
    if not path.is_file():
        raise IoFailure(f"no database at {path}")
    try:
        conn = sqlite3.connect(path)
        conn.execute("SELECT COUNT(*) FROM sqlite_master").fetchone()
    except sqlite3.Error as exc:
        raise IoFailure(f"{path} is not a readable database: {exc}") from exc
    conn.execute("PRAGMA foreign_keys = ON")
    return GpkgDatabase(path, conn, timestamp)
