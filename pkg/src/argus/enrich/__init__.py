"""Numerical enrichment kernels: interpolation, density, augmentation, coverage."""

from argus.enrich.coverage import coverage, lattice, point_coverage, raster_coverage
from argus.enrich.density import SyntheticPoint, augment_rare, kde, silverman_bandwidth
from argus.enrich.grid import DEFAULT_NODATA, GridSpec, samples_from_layer
from argus.enrich.interpolate import OrdinaryKriging, idw, idw_at, ordinary_kriging
from argus.enrich.linalg import LU, lu_factor
from argus.enrich.variogram import (
    EmpiricalVariogram,
    VariogramKind,
    VariogramModel,
    empirical_variogram,
    fit_variogram,
)

__all__ = [
    "DEFAULT_NODATA",
    "EmpiricalVariogram",
    "GridSpec",
    "LU",
    "OrdinaryKriging",
    "SyntheticPoint",
    "VariogramKind",
    "VariogramModel",
    "augment_rare",
    "coverage",
    "empirical_variogram",
    "fit_variogram",
    "idw",
    "idw_at",
    "kde",
    "lattice",
    "lu_factor",
    "ordinary_kriging",
    "point_coverage",
    "raster_coverage",
    "samples_from_layer",
    "silverman_bandwidth",
]
