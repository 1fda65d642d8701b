from argus.crs.geodesy import ecef_to_geodetic, geodetic_to_ecef, helmert7
from argus.crs.laea import laea_forward, laea_inverse
from argus.crs.registry import GREEK_GRID, LAEA_EUROPE, REGISTRY, WGS84, CrsRegistry, get_crs
from argus.crs.tmerc import tm_forward, tm_inverse
from argus.crs.transform import (
    transform,
    transform_coords,
    transform_geometry,
    transform_layer,
    transform_raster,
)

__all__ = [
    "CrsRegistry",
    "GREEK_GRID",
    "LAEA_EUROPE",
    "REGISTRY",
    "WGS84",
    "ecef_to_geodetic",
    "geodetic_to_ecef",
    "get_crs",
    "helmert7",
    "laea_forward",
    "laea_inverse",
    "tm_forward",
    "tm_inverse",
    "transform",
    "transform_coords",
    "transform_geometry",
    "transform_layer",
    "transform_raster",
]
