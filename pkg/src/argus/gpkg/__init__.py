"""GeoPackage writer, reader and conformance checks."""

from argus.gpkg.conformance import check_conformance
from argus.gpkg.database import (
    APPLICATION_ID,
    TIMESTAMP_COLUMNS,
    USER_VERSION,
    GpkgDatabase,
    LayerSummary,
    create_database,
    open_database,
)
from argus.gpkg.geometry import encode_blob, from_wkb, parse_blob, to_wkb, to_wkt

__all__ = [
    "APPLICATION_ID",
    "TIMESTAMP_COLUMNS",
    "USER_VERSION",
    "GpkgDatabase",
    "LayerSummary",
    "check_conformance",
    "create_database",
    "encode_blob",
    "from_wkb",
    "open_database",
    "parse_blob",
    "to_wkb",
    "to_wkt",
]
