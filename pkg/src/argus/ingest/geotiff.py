"""Minimal GeoTIFF support: classic TIFF, one IFD, one band, uncompressed strips."""

from __future__ import annotations

import struct

import numpy as np

from argus.crs.registry import REGISTRY
from argus.errors import (
    MalformedHeader,
    MissingGeoreference,
    UnknownCrs,
    UnsupportedCompression,
    UnsupportedLayout,
)
from argus.model import CrsDef, RasterGrid

TAG_WIDTH = 256
TAG_LENGTH = 257
TAG_BITS = 258
TAG_COMPRESSION = 259
TAG_PHOTOMETRIC = 262
TAG_STRIP_OFFSETS = 273
TAG_SAMPLES = 277
TAG_ROWS_PER_STRIP = 278
TAG_STRIP_BYTES = 279
TAG_PLANAR = 284
TAG_TILE_WIDTH = 322
TAG_TILE_OFFSETS = 324
TAG_SAMPLE_FORMAT = 339
TAG_PIXEL_SCALE = 33550
TAG_TIEPOINT = 33922
TAG_GEOKEYS = 34735
TAG_GDAL_NODATA = 42113

KEY_RASTER_TYPE = 1025
KEY_GEOGRAPHIC_TYPE = 2048
KEY_PROJECTED_TYPE = 3072
RASTER_PIXEL_IS_POINT = 2

# TIFF field type -> (struct code, size)
FIELD_TYPES = {
    1: ("B", 1), 2: ("s", 1), 3: ("H", 2), 4: ("I", 4), 5: ("II", 8),
    6: ("b", 1), 7: ("B", 1), 8: ("h", 2), 9: ("i", 4), 10: ("ii", 8),
    11: ("f", 4), 12: ("d", 8),
}


def _read_ifd(data: bytes, bo: str, offset: int) -> dict[int, tuple]:
    if offset + 2 > len(data):
        raise MalformedHeader("IFD offset beyond end of file")
    (count,) = struct.unpack(bo + "H", data[offset : offset + 2])
    tags: dict[int, tuple] = {}
    for k in range(count):
        entry = data[offset + 2 + 12 * k : offset + 14 + 12 * k]
        if len(entry) < 12:
            raise MalformedHeader("truncated IFD entry")
        tag, ftype, n = struct.unpack(bo + "HHI", entry[:8])
        if ftype not in FIELD_TYPES:
            continue
        code, size = FIELD_TYPES[ftype]
        nbytes = size * n
        if nbytes <= 4:
            raw = entry[8 : 8 + nbytes]
        else:
            (ptr,) = struct.unpack(bo + "I", entry[8:12])
            raw = data[ptr : ptr + nbytes]
            if len(raw) < nbytes:
                raise MalformedHeader(f"tag {tag} data runs past end of file")
        if ftype == 2:
            tags[tag] = (raw.split(b"\x00", 1)[0].decode("latin-1"),)
        elif ftype in (5, 10):
            vals = struct.unpack(bo + code[0] * (2 * n), raw)
            tags[tag] = tuple(vals[i] / vals[i + 1] for i in range(0, len(vals), 2))
        else:
            tags[tag] = struct.unpack(bo + code * n, raw)
    return tags


def _geokeys(tags: dict[int, tuple]) -> dict[int, int]:
    raw = tags.get(TAG_GEOKEYS)
    if not raw or len(raw) < 4:
        return {}
    nkeys = raw[3]
    keys = {}
    for i in range(nkeys):
        key_id, location, _count, value = raw[4 + 4 * i : 8 + 4 * i]
        if location == 0:
            keys[key_id] = value
    return keys


def _dtype(bits: int, fmt: int, bo: str) -> np.dtype:
    kind = {1: "u", 2: "i", 3: "f"}.get(fmt)
    if kind is None or (kind == "f" and bits not in (32, 64)) or bits not in (8, 16, 32, 64):
        raise UnsupportedLayout(f"sample format {fmt} with {bits} bits is not supported")
    return np.dtype(("<" if bo == "<" else ">") + kind + str(bits // 8))


def read_geotiff_minimal(data: bytes, crs_override: int | None = None) -> RasterGrid:
    if data[:4] == b"II*\x00":
        bo = "<"
    elif data[:4] == b"MM\x00*":
        bo = ">"
    elif data[:2] in (b"II", b"MM") and data[2:4] in (b"+\x00", b"\x00+"):
        raise UnsupportedLayout("BigTIFF is not supported")
    else:
        raise MalformedHeader("not a classic TIFF file")
    (ifd,) = struct.unpack(bo + "I", data[4:8])
    tags = _read_ifd(data, bo, ifd)

    compression = tags.get(TAG_COMPRESSION, (1,))[0]
    if compression != 1:
        raise UnsupportedCompression(f"TIFF compression {compression} is not supported (only 1)")
    if TAG_TILE_WIDTH in tags or TAG_TILE_OFFSETS in tags:
        raise UnsupportedLayout("tiled TIFF is not supported")
    if tags.get(TAG_SAMPLES, (1,))[0] != 1:
        raise UnsupportedLayout("only single-band rasters are supported")
    if TAG_PIXEL_SCALE not in tags or TAG_TIEPOINT not in tags:
        raise MissingGeoreference("TIFF lacks ModelPixelScaleTag or ModelTiepointTag")

    width = tags[TAG_WIDTH][0]
    height = tags[TAG_LENGTH][0]
    bits = tags.get(TAG_BITS, (1,))[0]
    fmt = tags.get(TAG_SAMPLE_FORMAT, (1,))[0]
    dtype = _dtype(bits, fmt, bo)
    offsets = tags.get(TAG_STRIP_OFFSETS)
    counts = tags.get(TAG_STRIP_BYTES)
    if not offsets or not counts:
        raise UnsupportedLayout("TIFF has no strip offsets")
    buf = b"".join(data[o : o + c] for o, c in zip(offsets, counts))
    need = width * height * dtype.itemsize
    if len(buf) < need:
        raise MalformedHeader(f"strips hold {len(buf)} bytes, need {need}")
    pixels = np.frombuffer(buf[:need], dtype=dtype).astype(np.float64).reshape(height, width)

    sx, sy = tags[TAG_PIXEL_SCALE][:2]
    if abs(sx - sy) > 1e-9 * max(abs(sx), abs(sy)):
        raise UnsupportedLayout(f"non-square pixels ({sx} x {sy})")
    ti, tj, _, tx, ty, _ = tags[TAG_TIEPOINT][:6]
    keys = _geokeys(tags)
    left = tx - ti * sx
    top = ty + tj * sy
    if keys.get(KEY_RASTER_TYPE) == RASTER_PIXEL_IS_POINT:
        left -= sx / 2
        top += sy / 2

    code = keys.get(KEY_PROJECTED_TYPE) or keys.get(KEY_GEOGRAPHIC_TYPE)
    crs: CrsDef
    if code and code in REGISTRY:
        crs = REGISTRY.get(code)
    elif crs_override is not None:
        crs = REGISTRY.get(crs_override)
    else:
        raise UnknownCrs(f"GeoTIFF CRS code {code} is not in the registry")

    nodata = -9999.0
    if TAG_GDAL_NODATA in tags:
        try:
            nodata = float(tags[TAG_GDAL_NODATA][0].strip())
        except ValueError:
            pass
    values = pixels[::-1]
    if np.isnan(values).any() and not np.isnan(nodata):
        values = np.where(np.isnan(values), nodata, values)
    return RasterGrid(
        origin=(left, top - height * sy),
        cell_size=sx,
        ncols=width,
        nrows=height,
        nodata=nodata,
        values=values,
        crs=crs,
    )


def write_geotiff_minimal(grid: RasterGrid, byteorder: str = "<") -> bytes:
    """Write float64 single-strip GeoTIFF with tiepoint, scale, geokeys and nodata."""
    bo = byteorder
    pixels = np.ascontiguousarray(grid.values[::-1], dtype=np.dtype(bo + "f8")).tobytes()
    x0, y0, x1, y1 = grid.bounds
    geographic = grid.crs.is_geographic
    geokeys = [1, 1, 0, 3, 1024, 0, 1, 2 if geographic else 1, 1025, 0, 1, 1]
    geokeys += [KEY_GEOGRAPHIC_TYPE if geographic else KEY_PROJECTED_TYPE, 0, 1, grid.crs.srs_id]
    nodata = (repr(grid.nodata) + "\x00").encode("ascii")
    # (tag, type, values) sorted by tag
    entries = [
        (TAG_WIDTH, 4, [grid.ncols]),
        (TAG_LENGTH, 4, [grid.nrows]),
        (TAG_BITS, 3, [64]),
        (TAG_COMPRESSION, 3, [1]),
        (TAG_PHOTOMETRIC, 3, [1]),
        (TAG_STRIP_OFFSETS, 4, [0]),
        (TAG_SAMPLES, 3, [1]),
        (TAG_ROWS_PER_STRIP, 4, [grid.nrows]),
        (TAG_STRIP_BYTES, 4, [len(pixels)]),
        (TAG_PLANAR, 3, [1]),
        (TAG_SAMPLE_FORMAT, 3, [3]),
        (TAG_PIXEL_SCALE, 12, [grid.cell_size, grid.cell_size, 0.0]),
        (TAG_TIEPOINT, 12, [0.0, 0.0, 0.0, x0, y1, 0.0]),
        (TAG_GEOKEYS, 3, geokeys),
        (TAG_GDAL_NODATA, 2, nodata),
    ]
    ifd_offset = 8
    ifd_size = 2 + 12 * len(entries) + 4
    extra = bytearray()
    extra_base = ifd_offset + ifd_size
    pixel_offset = None
    packed_entries = []
    for tag, ftype, vals in entries:
        code, size = FIELD_TYPES[ftype]
        if ftype == 2:
            payload = bytes(vals)
            count = len(payload)
        else:
            payload = struct.pack(bo + code * len(vals), *vals)
            count = len(vals)
        packed_entries.append([tag, ftype, count, payload])
    for e in packed_entries:
        if len(e[3]) > 4:
            if len(extra) % 2:
                extra += b"\x00"
            e.append(extra_base + len(extra))
            extra += e[3]
    if len(extra) % 2:
        extra += b"\x00"
    pixel_offset = extra_base + len(extra)
    out = bytearray((b"II*\x00" if bo == "<" else b"MM\x00*") + struct.pack(bo + "I", ifd_offset))
    out += struct.pack(bo + "H", len(packed_entries))
    for e in packed_entries:
        tag, ftype, count, payload = e[:4]
        if tag == TAG_STRIP_OFFSETS:
            payload = struct.pack(bo + "I", pixel_offset)
        out += struct.pack(bo + "HHI", tag, ftype, count)
        if len(payload) <= 4:
            out += payload.ljust(4, b"\x00")
        else:
            out += struct.pack(bo + "I", e[4])
    out += struct.pack(bo + "I", 0)
    out += extra
    out += pixels
    return bytes(out)
