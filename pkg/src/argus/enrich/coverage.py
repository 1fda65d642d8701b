"""Share of a site boundary that a dataset speaks for."""

from __future__ import annotations

import numpy as np

from argus.enrich.grid import as_points, blocks
from argus.errors import CrsMismatch, EmptyBoundary, NoPoints
from argus.model import CrsDef, Geometry, GeometryKind, RasterGrid, points_in_polygon

LATTICE = 200


def _check_boundary(boundary: Geometry) -> None:
    if boundary.kind not in (GeometryKind.POLYGON, GeometryKind.MULTIPOLYGON):
        raise EmptyBoundary("coverage boundary must be a polygon")
    xmin, ymin, xmax, ymax = boundary.bounds()
    if not (xmax > xmin and ymax > ymin):
        raise EmptyBoundary("coverage boundary has zero area")


def raster_coverage(grid: RasterGrid, boundary: Geometry, boundary_crs: CrsDef | None = None) -> float:
    """Valid cells over all cells whose centre lies inside ``boundary``."""
    if boundary_crs is not None and boundary_crs.srs_id != grid.crs.srs_id:
        raise CrsMismatch(f"raster is EPSG:{grid.crs.srs_id}, boundary is EPSG:{boundary_crs.srs_id}")
    _check_boundary(boundary)
    cx, cy = grid.cell_centers()
    inside = points_in_polygon(cx, cy, boundary)
    total = int(inside.sum())
    if total == 0:
        raise EmptyBoundary("no raster cell centre falls inside the boundary")
    return int((inside & grid.valid_mask).sum()) / total


def lattice(boundary: Geometry, n: int = LATTICE) -> tuple[np.ndarray, np.ndarray]:
    """Centres of an n-by-n lattice over the boundary's bounding box that fall inside it."""
    xmin, ymin, xmax, ymax = boundary.bounds()
    gx, gy = np.meshgrid(xmin + (np.arange(n) + 0.5) * (xmax - xmin) / n,
                         ymin + (np.arange(n) + 0.5) * (ymax - ymin) / n)
    gx, gy = gx.ravel(), gy.ravel()
    inside = points_in_polygon(gx, gy, boundary)
    return gx[inside], gy[inside]


def point_coverage(points, radius: float, boundary: Geometry) -> float:
    """Fraction of in-boundary lattice nodes within ``radius`` of any point."""
    _check_boundary(boundary)
    lx, ly = lattice(boundary)
    if lx.size == 0:
        raise EmptyBoundary("boundary contains no lattice node")
    try:
        xs, ys = as_points(points, "points", NoPoints)
    except NoPoints:
        return 0.0
    covered = np.zeros(lx.size, dtype=bool)
    r2 = float(radius) ** 2
    for sl in blocks(lx.size, max(1, (1 << 22) // len(xs))):
        d2 = (lx[sl, None] - xs[None, :]) ** 2 + (ly[sl, None] - ys[None, :]) ** 2
        covered[sl] = (d2 <= r2).any(axis=1)
    return int(covered.sum()) / lx.size


def coverage(data, boundary: Geometry, boundary_crs: CrsDef | None = None) -> float:
    """Dispatch on ``data``: a RasterGrid, or a ``(points, radius)`` pair."""
    if isinstance(data, RasterGrid):
        return raster_coverage(data, boundary, boundary_crs)
    points, radius = data
    return point_coverage(points, radius, boundary)
