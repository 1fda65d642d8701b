"""Readers for the raw input formats, plus dispatch by :class:`SourceDescriptor`."""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from argus.crs.registry import REGISTRY
from argus.errors import EmptyInput, IoFailure, UnsupportedFormat
from argus.ingest.asciigrid import read_ascii_grid, write_ascii_grid
from argus.ingest.delimited import ExtractionPattern, ExtractionResult, extract_structured, read_csv
from argus.ingest.geotiff import read_geotiff_minimal, write_geotiff_minimal
from argus.ingest.shapefile import read_shapefile, write_shapefile
from argus.model import Dataset, SiteConfig, snake_case

__all__ = [
    "ExtractionPattern",
    "ExtractionResult",
    "Format",
    "SourceDescriptor",
    "detect_format",
    "extract_structured",
    "read_ascii_grid",
    "read_csv",
    "read_geotiff_minimal",
    "read_shapefile",
    "read_source",
    "write_ascii_grid",
    "write_geotiff_minimal",
    "write_shapefile",
]


class Format(str, Enum):
    SHAPEFILE = "shapefile"
    ASCII_GRID = "ascii_grid"
    GEOTIFF = "geotiff"
    CSV = "csv"
    TXT = "txt"
    UNKNOWN = "unknown"


EXTENSIONS = {
    ".shp": Format.SHAPEFILE,
    ".asc": Format.ASCII_GRID,
    ".tif": Format.GEOTIFF,
    ".tiff": Format.GEOTIFF,
    ".csv": Format.CSV,
    ".tsv": Format.CSV,
    ".txt": Format.TXT,
}

# Formats named in the standardization table that are deliberately not parsed.
UNSUPPORTED_HINTS = {
    ".xlsx": "export the workbook to CSV first",
    ".xls": "export the workbook to CSV first",
    ".accdb": "export the tables to CSV first",
    ".gdb": "convert the geodatabase with a GIS tool first",
    ".adf": "convert the ArcInfo grid to ASCII grid or GeoTIFF first",
    ".mxd": "project files are not data sources",
    ".qgz": "project files are not data sources",
}


def detect_format(leading_bytes: bytes, filename: str) -> Format:
    """Magic numbers first, then the file extension."""
    head = leading_bytes[:8]
    if len(head) >= 4 and struct.unpack(">i", head[:4])[0] == 9994:
        return Format.SHAPEFILE
    if head[:4] in (b"II*\x00", b"MM\x00*"):
        return Format.GEOTIFF
    if head.lstrip()[:5].lower() == b"ncols":
        return Format.ASCII_GRID
    return EXTENSIONS.get(Path(filename).suffix.lower(), Format.UNKNOWN)


@dataclass(frozen=True)
class SourceDescriptor:
    path: str
    declared_format: Format | str = "auto"
    crs_override: int | None = None
    encoding: str = "utf-8"
    id: str = ""
    lon_col: str | None = None
    lat_col: str | None = None
    patterns: tuple[ExtractionPattern, ...] = field(default_factory=tuple)

    def __post_init__(self) -> None:
        if not self.path:
            raise EmptyInput("source path must be nonempty")
        if not self.id:
            object.__setattr__(self, "id", snake_case(Path(self.path).stem))

    @property
    def format(self) -> Format | None:
        if self.declared_format in ("auto", None):
            return None
        return Format(self.declared_format)


def _read_optional(path: Path, encoding: str = "latin-1") -> str | None:
    return path.read_text(encoding=encoding) if path.exists() else None


def read_source(src: SourceDescriptor, site: SiteConfig | None = None) -> tuple[Dataset, bytes]:
    """Read one input; returns the dataset and the primary file's bytes (for checksums)."""
    path = Path(src.path)
    suffix = path.suffix.lower()
    if suffix in UNSUPPORTED_HINTS:
        raise UnsupportedFormat(f"{path.name}: {suffix} is not read directly; {UNSUPPORTED_HINTS[suffix]}")
    try:
        data = path.read_bytes()
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc.strerror or exc}") from exc
    fmt = src.format or detect_format(data[:8], path.name)
    name = src.id
    if fmt is Format.SHAPEFILE:
        try:
            dbf = path.with_suffix(".dbf").read_bytes()
        except OSError as exc:
            raise IoFailure(f"shapefile {path.name} has no readable .dbf: {exc.strerror or exc}") from exc
        prj = _read_optional(path.with_suffix(".prj"))
        return read_shapefile(data, dbf, prj, src.crs_override, name=name), data
    if fmt is Format.ASCII_GRID:
        crs = src.crs_override
        if crs is None:
            prj = _read_optional(path.with_suffix(".prj"))
            if prj:
                match = REGISTRY.match_wkt(prj)
                crs = match.srs_id if match else None
        return read_ascii_grid(data, crs), data
    if fmt is Format.GEOTIFF:
        return read_geotiff_minimal(data, src.crs_override), data
    if fmt is Format.CSV:
        return read_csv(data, site, src.lon_col, src.lat_col, name=name, encoding=src.encoding), data
    if fmt is Format.TXT:
        if not src.patterns:
            raise UnsupportedFormat(f"{path.name}: text inputs need extraction patterns")
        result = extract_structured(data.decode(src.encoding), list(src.patterns), site, name=name)
        return result.layer, data
    raise UnsupportedFormat(f"cannot determine the format of {path.name}")
