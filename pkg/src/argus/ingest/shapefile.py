"""ESRI Shapefile (.shp + .dbf + .prj) reader and a minimal writer.

The writer exists so fixtures and re-exports can be produced without GDAL;
it emits the same subset the reader accepts (shape types 0, 1, 3, 5, 8 and
dBase III field types C, N, F, L, D).
"""

from __future__ import annotations

import datetime as dt
import logging
import struct
from typing import Iterable, Sequence

from argus.crs.registry import REGISTRY
from argus.errors import MalformedHeader, RecordCountMismatch, UnknownCrs, UnsupportedShapeType
from argus.model import AttributeField, CrsDef, Feature, FeatureLayer, Geometry, GeometryKind, ValueType

log = logging.getLogger(__name__)

FILE_CODE = 9994
VERSION = 1000
SHAPE_NULL, SHAPE_POINT, SHAPE_POLYLINE, SHAPE_POLYGON, SHAPE_MULTIPOINT = 0, 1, 3, 5, 8
SUPPORTED = {SHAPE_NULL, SHAPE_POINT, SHAPE_POLYLINE, SHAPE_POLYGON, SHAPE_MULTIPOINT}


# --------------------------------------------------------------------------
# dBase III


def _decode_text(raw: bytes, fallback_used: list[bool]) -> str:
    raw = raw.rstrip(b"\x00 ").lstrip(b" ")
    try:
        return raw.decode("utf-8")
    except UnicodeDecodeError:
        fallback_used[0] = True
        return raw.decode("latin-1")


def read_dbf(dbf: bytes) -> tuple[list[AttributeField], list[tuple], bool]:
    """Return (fields, records, used_latin1_fallback)."""
    if len(dbf) < 32:
        raise MalformedHeader("DBF shorter than its 32-byte header")
    nrec, header_len, rec_len = struct.unpack("<IHH", dbf[4:12])
    fields: list[AttributeField] = []
    specs: list[tuple[str, int, int]] = []
    pos = 32
    while True:
        if pos >= len(dbf):
            raise MalformedHeader("DBF field descriptors are not terminated by 0x0D")
        if dbf[pos] == 0x0D:
            break
        desc = dbf[pos : pos + 32]
        if len(desc) < 32:
            raise MalformedHeader("truncated DBF field descriptor")
        name = desc[:11].split(b"\x00", 1)[0].decode("latin-1").strip()
        ftype = chr(desc[11])
        length, decimals = desc[16], desc[17]
        if ftype == "C":
            vtype = ValueType.TEXT
        elif ftype == "F" or (ftype == "N" and decimals > 0):
            vtype = ValueType.REAL
        elif ftype == "N":
            vtype = ValueType.INTEGER
        elif ftype == "L":
            vtype = ValueType.BOOLEAN
        elif ftype == "D":
            vtype = ValueType.DATE
        else:
            vtype = ValueType.TEXT
        fields.append(AttributeField(raw_name=name, value_type=vtype))
        specs.append((ftype, length, decimals))
        pos += 32
    if sum(s[1] for s in specs) + 1 != rec_len:
        raise MalformedHeader(f"DBF record length {rec_len} disagrees with field widths")
    if header_len + nrec * rec_len > len(dbf):
        raise MalformedHeader("DBF is shorter than its declared record count")
    fallback = [False]
    records = []
    for r in range(nrec):
        start = header_len + r * rec_len + 1  # skip deletion flag
        cells = []
        for (ftype, length, _), f in zip(specs, fields):
            raw = dbf[start : start + length]
            start += length
            cells.append(_parse_dbf_cell(raw, f.value_type, fallback))
        records.append(tuple(cells))
    return fields, records, fallback[0]


def _parse_dbf_cell(raw: bytes, vtype: ValueType, fallback: list[bool]):
    if vtype is ValueType.TEXT:
        text = _decode_text(raw, fallback)
        return text if text else None
    text = raw.decode("latin-1").strip().strip("\x00")
    if not text or set(text) <= {"*", "?"}:
        return None
    if vtype is ValueType.INTEGER:
        try:
            return int(text)
        except ValueError:
            value = float(text)
            if not value.is_integer():
                raise MalformedHeader(f"non-integral value {text!r} in integer DBF field") from None
            return int(value)
    if vtype is ValueType.REAL:
        return float(text)
    if vtype is ValueType.BOOLEAN:
        if text in "TtYy":
            return True
        if text in "FfNn":
            return False
        return None
    try:
        return dt.date(int(text[:4]), int(text[4:6]), int(text[6:8]))
    except ValueError:
        return None


def write_dbf(fields: Sequence[AttributeField], records: Iterable[Sequence], encoding: str = "utf-8") -> bytes:
    specs = []
    for f in fields:
        name = f.column_name[:10].encode("ascii", "replace")
        if f.value_type in (ValueType.TEXT, ValueType.CATEGORICAL):
            specs.append((name, b"C", 254, 0))
        elif f.value_type is ValueType.INTEGER:
            specs.append((name, b"N", 18, 0))
        elif f.value_type is ValueType.REAL:
            specs.append((name, b"N", 24, 15))
        elif f.value_type is ValueType.BOOLEAN:
            specs.append((name, b"L", 1, 0))
        else:
            specs.append((name, b"D", 8, 0))
    records = list(records)
    header_len = 32 + 32 * len(specs) + 1
    rec_len = 1 + sum(s[2] for s in specs)
    today = dt.date(1995, 7, 26)  # fixed stamp keeps output deterministic
    out = bytearray(struct.pack("<BBBBIHH20x", 3, today.year - 1900, today.month, today.day, len(records), header_len, rec_len))
    for name, ftype, length, dec in specs:
        out += struct.pack("<11sc4xBB14x", name, ftype, length, dec)
    out += b"\x0d"
    for rec in records:
        out += b" "
        for value, (_, ftype, length, dec) in zip(rec, specs):
            if value is None:
                cell = b"?" if ftype == b"L" else b""
            elif ftype == b"C":
                cell = str(value).encode(encoding)[:length]
            elif ftype == b"L":
                cell = b"T" if value else b"F"
            elif ftype == b"D":
                cell = value.strftime("%Y%m%d").encode()
            elif dec:
                cell = repr(float(value)).encode()
                if len(cell) > length:
                    cell = f"{value:.{dec}e}".encode()
            else:
                cell = str(int(value)).encode()
            if ftype == b"C":
                out += cell.ljust(length, b" ")
            else:
                out += cell.rjust(length, b" ")
    out += b"\x1a"
    return bytes(out)


# --------------------------------------------------------------------------
# .shp


def _ring_area2(ring) -> float:
    return sum(x1 * y2 - x2 * y1 for (x1, y1), (x2, y2) in zip(ring[:-1], ring[1:]))


def _parse_record(content: bytes, expected: int, recno: int):
    stype = struct.unpack("<i", content[:4])[0]
    if stype == SHAPE_NULL:
        return None, False
    if stype != expected:
        raise UnsupportedShapeType(f"record {recno}: shape type {stype} in a type {expected} file")
    if stype == SHAPE_POINT:
        x, y = struct.unpack("<2d", content[4:20])
        return Geometry.point(x, y), False
    if stype == SHAPE_MULTIPOINT:
        (npts,) = struct.unpack("<i", content[36:40])
        pts = struct.unpack(f"<{2 * npts}d", content[40 : 40 + 16 * npts])
        return Geometry(GeometryKind.MULTIPOINT, list(zip(pts[::2], pts[1::2]))), False
    nparts, npts = struct.unpack("<2i", content[36:44])
    parts = list(struct.unpack(f"<{nparts}i", content[44 : 44 + 4 * nparts])) + [npts]
    off = 44 + 4 * nparts
    flat = struct.unpack(f"<{2 * npts}d", content[off : off + 16 * npts])
    pts = list(zip(flat[::2], flat[1::2]))
    pieces = [pts[parts[i] : parts[i + 1]] for i in range(nparts)]
    if stype == SHAPE_POLYLINE:
        return Geometry(GeometryKind.LINESTRING, pieces[0]), nparts > 1
    # outer rings are clockwise (negative signed area); holes follow their shell
    polys: list[list] = []
    for ring in pieces:
        if _ring_area2(ring) <= 0 or not polys:
            polys.append([ring])
        else:
            polys[-1].append(ring)
    if len(polys) == 1:
        return Geometry(GeometryKind.POLYGON, polys[0]), False
    return Geometry(GeometryKind.MULTIPOLYGON, polys), False


def read_shp(shp: bytes) -> tuple[int, list[Geometry | None], int]:
    """Return (shape_type, geometries, multipart_polyline_count)."""
    if len(shp) < 100:
        raise MalformedHeader("SHP shorter than its 100-byte header")
    code = struct.unpack(">i", shp[:4])[0]
    if code != FILE_CODE:
        raise MalformedHeader(f"SHP file code is {code}, expected {FILE_CODE}")
    words = struct.unpack(">i", shp[24:28])[0]
    if words * 2 != len(shp):
        raise MalformedHeader(f"SHP header length {words * 2} bytes, file has {len(shp)}")
    stype = struct.unpack("<i", shp[32:36])[0]
    if stype not in SUPPORTED:
        raise UnsupportedShapeType(f"shape type {stype} is not supported (0, 1, 3, 5, 8)")
    geoms = []
    multipart = 0
    pos = 100
    while pos < len(shp):
        if pos + 8 > len(shp):
            raise MalformedHeader(f"truncated record header at byte {pos}")
        recno, clen = struct.unpack(">2i", shp[pos : pos + 8])
        content = shp[pos + 8 : pos + 8 + 2 * clen]
        if len(content) != 2 * clen:
            raise MalformedHeader(f"record {recno} runs past end of file")
        try:
            geom, split = _parse_record(content, stype, recno)
        except struct.error as exc:
            raise MalformedHeader(f"record {recno}: {exc}") from None
        multipart += split
        geoms.append(geom)
        pos += 8 + 2 * clen
    return stype, geoms, multipart


def read_shapefile(
    shp: bytes,
    dbf: bytes,
    prj: str | None = None,
    crs_override: int | None = None,
    name: str = "layer",
) -> FeatureLayer:
    _, geoms, multipart = read_shp(shp)
    fields, records, fallback = read_dbf(dbf)
    if len(records) != len(geoms):
        raise RecordCountMismatch(f"SHP has {len(geoms)} records, DBF has {len(records)}")
    crs: CrsDef | None = REGISTRY.match_wkt(prj) if prj else None
    if crs is None and crs_override is not None:
        crs = REGISTRY.get(crs_override)
    if crs is None:
        raise UnknownCrs("shapefile CRS could not be resolved from .prj and no override was given")
    metadata = {"source_format": "shapefile"}
    if fallback:
        metadata["dbf_encoding_fallback"] = "latin-1"
    if multipart:
        log.warning("%s: kept only the first part of %d multipart polylines", name, multipart)
        metadata["multipart_lines_truncated"] = str(multipart)
    rows = tuple(Feature(rec, g) for rec, g in zip(records, geoms))
    return FeatureLayer(name=name, crs=crs, schema=tuple(fields), rows=rows, metadata=metadata)


def _shape_type_for(kinds: set[GeometryKind]) -> int:
    if not kinds:
        return SHAPE_NULL
    if len(kinds) > 1:
        if kinds <= {GeometryKind.POLYGON, GeometryKind.MULTIPOLYGON}:
            return SHAPE_POLYGON
        raise UnsupportedShapeType(f"a shapefile holds one geometry type, got {sorted(k.value for k in kinds)}")
    k = kinds.pop()
    return {
        GeometryKind.POINT: SHAPE_POINT,
        GeometryKind.MULTIPOINT: SHAPE_MULTIPOINT,
        GeometryKind.LINESTRING: SHAPE_POLYLINE,
        GeometryKind.POLYGON: SHAPE_POLYGON,
        GeometryKind.MULTIPOLYGON: SHAPE_POLYGON,
    }[k]


def _oriented(ring, clockwise: bool):
    cw = _ring_area2(ring) < 0
    return list(ring) if cw == clockwise else list(reversed(ring))


def _encode_geometry(g: Geometry | None, stype: int) -> bytes:
    if g is None:
        return struct.pack("<i", SHAPE_NULL)
    if stype == SHAPE_POINT:
        return struct.pack("<i2d", stype, *g.coordinates)
    xmin, ymin, xmax, ymax = g.bounds()
    box = struct.pack("<4d", xmin, ymin, xmax, ymax)
    if stype == SHAPE_MULTIPOINT:
        pts = g.coordinates
        return struct.pack("<i", stype) + box + struct.pack("<i", len(pts)) + b"".join(struct.pack("<2d", *p) for p in pts)
    if stype == SHAPE_POLYLINE:
        parts = [list(g.coordinates)]
    else:
        parts = []
        for rings in g.polygons():
            parts.append(_oriented(rings[0], clockwise=True))
            parts.extend(_oriented(r, clockwise=False) for r in rings[1:])
    starts, n = [], 0
    for p in parts:
        starts.append(n)
        n += len(p)
    body = struct.pack("<i", stype) + box + struct.pack("<2i", len(parts), n)
    body += struct.pack(f"<{len(starts)}i", *starts)
    body += b"".join(struct.pack("<2d", *pt) for p in parts for pt in p)
    return body


def write_shapefile(layer: FeatureLayer) -> tuple[bytes, bytes, str]:
    """Encode ``layer`` as (shp, dbf, prj) byte strings."""
    geoms = [r.geometry for r in layer.rows]
    stype = _shape_type_for({g.kind for g in geoms if g is not None})
    records = bytearray()
    for i, g in enumerate(geoms, start=1):
        content = _encode_geometry(g, stype)
        records += struct.pack(">2i", i, len(content) // 2) + content
    present = [g for g in geoms if g is not None]
    if present:
        bxs = [g.bounds() for g in present]
        bbox = (min(b[0] for b in bxs), min(b[1] for b in bxs), max(b[2] for b in bxs), max(b[3] for b in bxs))
    else:
        bbox = (0.0, 0.0, 0.0, 0.0)
    total = 100 + len(records)
    header = struct.pack(">7i", FILE_CODE, 0, 0, 0, 0, 0, total // 2)
    header += struct.pack("<2i", VERSION, stype) + struct.pack("<8d", *bbox, 0.0, 0.0, 0.0, 0.0)
    dbf = write_dbf(layer.schema, [r.values for r in layer.rows])
    return header + bytes(records), dbf, layer.crs.definition
