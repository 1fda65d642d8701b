"""Byte- and table-level GeoPackage checks run against every produced file."""

from __future__ import annotations

import sqlite3
import struct
from pathlib import Path

from argus.errors import ArgusError
from argus.gpkg.database import APPLICATION_ID, REQUIRED_TABLES, USER_VERSION, quote_ident
from argus.gpkg.geometry import envelope_contains, parse_blob


def check_conformance(path: str | Path) -> list[str]:
    """Return a list of violations; empty means the file passed."""
    path = Path(path)
    problems: list[str] = []
    head = path.read_bytes()[:100]
    if len(head) < 100 or not head.startswith(b"SQLite format 3\x00"):
        return ["not an SQLite 3 container"]
    if head[68:72] != b"GPKG" or struct.unpack(">I", head[68:72])[0] != APPLICATION_ID:
        problems.append(f"application_id bytes are {head[68:72]!r}, expected b'GPKG'")
    (user_version,) = struct.unpack(">I", head[60:64])
    if user_version != USER_VERSION:
        problems.append(f"user_version is {user_version}, expected {USER_VERSION}")

    conn = sqlite3.connect(f"file:{path}?mode=ro", uri=True)
    try:
        tables = {r[0] for r in conn.execute("SELECT name FROM sqlite_master WHERE type='table'")}
        missing = [t for t in REQUIRED_TABLES if t not in tables]
        if missing:
            problems.extend(f"missing required table {t}" for t in missing)
            return problems
        if conn.execute("PRAGMA integrity_check").fetchone()[0] != "ok":
            problems.append("integrity_check failed")
        for t, rowid, parent, _ in conn.execute("PRAGMA foreign_key_check"):
            problems.append(f"{t} row {rowid} references a missing {parent} row")
        srs_ids = {r[0] for r in conn.execute("SELECT srs_id FROM gpkg_spatial_ref_sys")}
        for required in (-1, 0, 4326):
            if required not in srs_ids:
                problems.append(f"gpkg_spatial_ref_sys lacks srs_id {required}")
        contents = {r[0]: (r[1], r[2]) for r in conn.execute("SELECT table_name, data_type, srs_id FROM gpkg_contents")}
        for name, (dtype, srs) in contents.items():
            if name not in tables:
                problems.append(f"gpkg_contents names missing table {name}")
            if srs is not None and srs not in srs_ids:
                problems.append(f"{name}: srs_id {srs} not in gpkg_spatial_ref_sys")
        geom_cols = conn.execute("SELECT table_name, column_name, srs_id FROM gpkg_geometry_columns").fetchall()
        geom_tables = {g[0] for g in geom_cols}
        for name, (dtype, _) in contents.items():
            if dtype == "features" and name not in geom_tables:
                problems.append(f"features table {name} has no gpkg_geometry_columns row")
        for table, column, srs in geom_cols:
            if contents.get(table, (None,))[0] != "features":
                problems.append(f"geometry column {table}.{column} has no 'features' gpkg_contents row")
                continue
            if srs not in srs_ids:
                problems.append(f"{table}: srs_id {srs} not in gpkg_spatial_ref_sys")
            for rowid, blob in conn.execute(f"SELECT rowid, {quote_ident(column)} FROM {quote_ident(table)}"):
                if blob is None:
                    continue
                try:
                    blob_srs, envelope, geom = parse_blob(blob)
                except ArgusError as exc:
                    problems.append(f"{table} row {rowid}: {exc}")
                    continue
                if blob_srs != srs:
                    problems.append(f"{table} row {rowid}: BLOB srs_id {blob_srs} differs from column srs_id {srs}")
                if envelope is not None and not envelope_contains(envelope, geom):
                    problems.append(f"{table} row {rowid}: envelope does not contain all vertices")
    finally:
        conn.close()
    return problems
