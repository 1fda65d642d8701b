"""ESRI ASCII grid (.asc) reader and writer."""

from __future__ import annotations

import numpy as np

from argus.crs.registry import REGISTRY, WGS84
from argus.errors import CellCountMismatch, MissingHeaderKey, NonNumericCell
from argus.model import CrsDef, RasterGrid

DEFAULT_NODATA = -9999.0
HEADER_KEYS = {"ncols", "nrows", "xllcorner", "xllcenter", "yllcorner", "yllcenter", "cellsize", "nodata_value"}


def read_ascii_grid(data: bytes | str, crs: CrsDef | int | None = None) -> RasterGrid:
    """Parse an ASCII grid.  The first data row in the file is the top row;
    the returned grid stores rows bottom-up."""
    text = data.decode("utf-8") if isinstance(data, bytes) else data
    lines = text.splitlines()
    header: dict[str, str] = {}
    i = 0
    while i < len(lines):
        parts = lines[i].split()
        if not parts:
            i += 1
            continue
        key = parts[0].lower()
        if key not in HEADER_KEYS:
            break
        if len(parts) != 2:
            raise MissingHeaderKey(f"header line {i + 1} has no value: {lines[i]!r}")
        header[key] = parts[1]
        i += 1
    for need in ("ncols", "nrows", "cellsize"):
        if need not in header:
            raise MissingHeaderKey(f"ASCII grid header lacks {need.upper()}")
    if "xllcorner" not in header and "xllcenter" not in header:
        raise MissingHeaderKey("ASCII grid header lacks XLLCORNER/XLLCENTER")
    if "yllcorner" not in header and "yllcenter" not in header:
        raise MissingHeaderKey("ASCII grid header lacks YLLCORNER/YLLCENTER")
    try:
        ncols, nrows = int(header["ncols"]), int(header["nrows"])
        cell = float(header["cellsize"])
        x0 = float(header.get("xllcorner", header.get("xllcenter")))
        y0 = float(header.get("yllcorner", header.get("yllcenter")))
        nodata = float(header.get("nodata_value", DEFAULT_NODATA))
    except ValueError as exc:
        raise NonNumericCell(f"non-numeric header value: {exc}") from None
    if "xllcenter" in header:
        x0 -= cell / 2
    if "yllcenter" in header:
        y0 -= cell / 2
    tokens = " ".join(lines[i:]).split()
    if len(tokens) != nrows * ncols:
        raise CellCountMismatch(f"expected {nrows * ncols} cells ({nrows}x{ncols}), found {len(tokens)}")
    try:
        values = np.array([float(t) for t in tokens], dtype=float)
    except ValueError:
        bad = next(t for t in tokens if not _is_float(t))
        raise NonNumericCell(f"non-numeric cell {bad!r}") from None
    grid = values.reshape(nrows, ncols)[::-1]
    resolved = REGISTRY.get(crs) if crs is not None else WGS84
    return RasterGrid(
        origin=(x0, y0),
        cell_size=cell,
        ncols=ncols,
        nrows=nrows,
        nodata=nodata,
        values=grid,
        crs=resolved,
        metadata={} if crs is not None else {"crs_assumed": "4326"},
    )


def _is_float(t: str) -> bool:
    try:
        float(t)
        return True
    except ValueError:
        return False


def write_ascii_grid(grid: RasterGrid) -> bytes:
    """Serialize with ``repr`` floats so a re-read reproduces values exactly."""
    lines = [
        f"ncols {grid.ncols}",
        f"nrows {grid.nrows}",
        f"xllcorner {grid.origin[0]!r}",
        f"yllcorner {grid.origin[1]!r}",
        f"cellsize {grid.cell_size!r}",
        f"NODATA_value {grid.nodata!r}",
    ]
    for row in grid.values[::-1]:
        lines.append(" ".join(repr(float(v)) for v in row))
    return ("\n".join(lines) + "\n").encode("ascii")
