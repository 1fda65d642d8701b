"""GeoPackage geometry BLOBs: header, envelope and ISO WKB body."""

from __future__ import annotations

import struct

from argus.errors import CorruptGeometryBlob, UnsupportedType
from argus.model import Geometry, GeometryKind

MAGIC = b"GP"
VERSION = 0
# bit 0: little-endian header; bits 1-3: envelope indicator 1 ([minx, maxx, miny, maxy])
FLAGS_LE_XY = 0b0000_0011
ENVELOPE_DOUBLES = {0: 0, 1: 4, 2: 6, 3: 6, 4: 8}

WKB_CODES = {
    GeometryKind.POINT: 1,
    GeometryKind.LINESTRING: 2,
    GeometryKind.POLYGON: 3,
    GeometryKind.MULTIPOINT: 4,
    GeometryKind.MULTIPOLYGON: 6,
}
KINDS_BY_CODE = {v: k for k, v in WKB_CODES.items()}
TYPE_NAMES = {k: k.value.upper() for k in GeometryKind}


# ------------------------------------------------------------------ WKB


def _points(coords) -> bytes:
    flat = [c for p in coords for c in p]
    return struct.pack(f"<I{len(flat)}d", len(coords), *flat)


def _rings(rings) -> bytes:
    return struct.pack("<I", len(rings)) + b"".join(_points(r) for r in rings)


def to_wkb(g: Geometry) -> bytes:
    """Little-endian ISO WKB."""
    k = g.kind
    head = struct.pack("<BI", 1, WKB_CODES[k])
    if k is GeometryKind.POINT:
        return head + struct.pack("<2d", *g.coordinates)
    if k is GeometryKind.LINESTRING:
        return head + _points(g.coordinates)
    if k is GeometryKind.POLYGON:
        return head + _rings(g.coordinates)
    if k is GeometryKind.MULTIPOINT:
        return head + struct.pack("<I", len(g.coordinates)) + b"".join(
            struct.pack("<BI2d", 1, 1, *p) for p in g.coordinates
        )
    return head + struct.pack("<I", len(g.coordinates)) + b"".join(
        struct.pack("<BI", 1, 3) + _rings(poly) for poly in g.coordinates
    )


class _Reader:
    def __init__(self, data: bytes, pos: int, base: int) -> None:
        self.data, self.pos, self.base = data, pos, base

    def take(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.data):
            raise CorruptGeometryBlob("WKB truncated", self.base + self.pos)
        vals = struct.unpack_from(fmt, self.data, self.pos)
        self.pos += size
        return vals

    def header(self, expect: int | None = None) -> tuple[str, int]:
        at = self.pos
        (order,) = self.take("B")
        if order not in (0, 1):
            raise CorruptGeometryBlob(f"bad WKB byte-order marker {order}", self.base + at)
        bo = "<" if order == 1 else ">"
        (code,) = self.take(bo + "I")
        if code not in KINDS_BY_CODE:
            raise UnsupportedType(f"WKB geometry type {code} is not supported (2-D point/line/polygon/multipoint/multipolygon only)")
        if expect is not None and code != expect:
            raise CorruptGeometryBlob(f"expected WKB type {expect}, found {code}", self.base + at)
        return bo, code

    def points(self, bo: str) -> list[tuple[float, float]]:
        (n,) = self.take(bo + "I")
        if n > (len(self.data) - self.pos) // 16:
            raise CorruptGeometryBlob(f"WKB claims {n} points", self.base + self.pos - 4)
        flat = self.take(f"{bo}{2 * n}d")
        return [(flat[2 * i], flat[2 * i + 1]) for i in range(n)]

    def rings(self, bo: str) -> list[list[tuple[float, float]]]:
        (n,) = self.take(bo + "I")
        return [self.points(bo) for _ in range(n)]


def from_wkb(data: bytes, offset: int = 0, base: int = 0) -> Geometry:
    """Decode WKB in either byte order starting at ``offset``."""
    r = _Reader(data, offset, base)
    bo, code = r.header()
    kind = KINDS_BY_CODE[code]
    if kind is GeometryKind.POINT:
        coords = r.take(bo + "2d")
    elif kind is GeometryKind.LINESTRING:
        coords = r.points(bo)
    elif kind is GeometryKind.POLYGON:
        coords = r.rings(bo)
    elif kind is GeometryKind.MULTIPOINT:
        (n,) = r.take(bo + "I")
        coords = []
        for _ in range(n):
            pbo, _ = r.header(1)
            coords.append(r.take(pbo + "2d"))
    else:
        (n,) = r.take(bo + "I")
        coords = []
        for _ in range(n):
            pbo, _ = r.header(3)
            coords.append(r.rings(pbo))
    return Geometry(kind, coords)


# ------------------------------------------------------------------ BLOB


def encode_blob(g: Geometry, srs_id: int) -> bytes:
    xmin, ymin, xmax, ymax = g.bounds()
    return MAGIC + struct.pack("<BBi4d", VERSION, FLAGS_LE_XY, srs_id, xmin, xmax, ymin, ymax) + to_wkb(g)


def parse_blob(blob: bytes) -> tuple[int, tuple[float, ...] | None, Geometry]:
    """Return (srs_id, envelope or None, geometry); the envelope is as stored,
    ``[minx, maxx, miny, maxy, ...]``."""
    blob = bytes(blob)
    if len(blob) < 8:
        raise CorruptGeometryBlob("BLOB shorter than the 8-byte header", len(blob))
    if blob[:2] != MAGIC:
        raise CorruptGeometryBlob(f"bad magic {blob[:2]!r}", 0)
    if blob[2] != VERSION:
        raise CorruptGeometryBlob(f"unsupported version {blob[2]}", 2)
    flags = blob[3]
    if flags & 0b1110_0000:
        raise CorruptGeometryBlob(f"reserved flag bits set in 0x{flags:02x}", 3)
    if flags & 0b0010_0000:
        raise CorruptGeometryBlob("extended GeoPackage geometry types are not supported", 3)
    envelope_kind = (flags >> 1) & 0b111
    if envelope_kind not in ENVELOPE_DOUBLES:
        raise CorruptGeometryBlob(f"invalid envelope indicator {envelope_kind}", 3)
    bo = "<" if flags & 1 else ">"
    (srs_id,) = struct.unpack_from(bo + "i", blob, 4)
    nenv = ENVELOPE_DOUBLES[envelope_kind]
    if len(blob) < 8 + 8 * nenv:
        raise CorruptGeometryBlob("envelope truncated", len(blob))
    envelope = struct.unpack_from(f"{bo}{nenv}d", blob, 8) if nenv else None
    if flags & 0b0001_0000:
        raise UnsupportedType("empty geometries are not supported")
    return srs_id, envelope, from_wkb(blob, 8 + 8 * nenv)


def envelope_contains(envelope: tuple[float, ...], g: Geometry) -> bool:
    xmin, ymin, xmax, ymax = g.bounds()
    return envelope[0] <= xmin and xmax <= envelope[1] and envelope[2] <= ymin and ymax <= envelope[3]


# ------------------------------------------------------------------ WKT


def _fmt(v: float) -> str:
    return repr(float(v))


def _seq(points) -> str:
    return "(" + ", ".join(f"{_fmt(x)} {_fmt(y)}" for x, y in points) + ")"


def to_wkt(g: Geometry) -> str:
    k = g.kind
    if k is GeometryKind.POINT:
        return f"POINT ({_fmt(g.coordinates[0])} {_fmt(g.coordinates[1])})"
    if k is GeometryKind.LINESTRING:
        return "LINESTRING " + _seq(g.coordinates)
    if k is GeometryKind.MULTIPOINT:
        return "MULTIPOINT (" + ", ".join(f"({_fmt(x)} {_fmt(y)})" for x, y in g.coordinates) + ")"
    if k is GeometryKind.POLYGON:
        return "POLYGON (" + ", ".join(_seq(r) for r in g.coordinates) + ")"
    return "MULTIPOLYGON (" + ", ".join("(" + ", ".join(_seq(r) for r in p) + ")" for p in g.coordinates) + ")"
