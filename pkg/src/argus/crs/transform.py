"""Reprojection of coordinates, geometries, layers and rasters between registered CRSs."""

from __future__ import annotations

import math
from dataclasses import replace

import numpy as np

from argus.crs.geodesy import ecef_to_geodetic, geodetic_to_ecef, helmert7
from argus.crs.laea import laea_forward, laea_inverse
from argus.crs.registry import get_crs
from argus.crs.tmerc import tm_forward, tm_inverse
from argus.model import CrsDef, CrsKind, FeatureLayer, Feature, Geometry, RasterGrid


def to_geodetic(xs, ys, crs: CrsDef):
    """Native coordinates -> (lon, lat) degrees on the CRS's own datum."""
    if crs.kind is CrsKind.GEOGRAPHIC:
        return np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    if crs.kind is CrsKind.TRANSVERSE_MERCATOR:
        lat, lon = tm_inverse(xs, ys, crs)
    else:
        lat, lon = laea_inverse(xs, ys, crs)
    return lon, lat


def from_geodetic(lon, lat, crs: CrsDef):
    if crs.kind is CrsKind.GEOGRAPHIC:
        return np.asarray(lon, dtype=float), np.asarray(lat, dtype=float)
    if crs.kind is CrsKind.TRANSVERSE_MERCATOR:
        return tm_forward(lat, lon, crs)
    return laea_forward(lat, lon, crs)


def transform_coords(xs, ys, source: CrsDef | int, target: CrsDef | int):
    """Run the full inverse-project / datum-shift / project chain on arrays.

    Ellipsoidal heights are taken as zero on input and discarded on output.
    """
    src, dst = get_crs(source), get_crs(target)
    if src == dst:
        return np.asarray(xs, dtype=float), np.asarray(ys, dtype=float)
    lon, lat = to_geodetic(xs, ys, src)
    if src.helmert_to_wgs84 != dst.helmert_to_wgs84 or src.ellipsoid != dst.ellipsoid:
        xyz = geodetic_to_ecef(lat, lon, src.ellipsoid)
        xyz = helmert7(xyz, src.helmert_to_wgs84)
        xyz = helmert7(xyz, dst.helmert_to_wgs84, inverse=True)
        lat, lon, _ = ecef_to_geodetic(*xyz, dst.ellipsoid)
    return from_geodetic(lon, lat, dst)


def transform_geometry(g: Geometry, source: CrsDef | int, target: CrsDef | int) -> Geometry:
    src, dst = get_crs(source), get_crs(target)
    if src == dst:
        return g
    return g.map_vertices(lambda xs, ys: transform_coords(xs, ys, src, dst))


def transform_layer(layer: FeatureLayer, target: CrsDef | int) -> FeatureLayer:
    dst = get_crs(target)
    if layer.crs == dst:
        return layer
    geoms = [r.geometry for r in layer.rows]
    present = [g for g in geoms if g is not None]
    # one vectorised call over all vertices of the layer
    counts = [len(g.vertices()) for g in present]
    if present:
        allv = np.asarray([v for g in present for v in g.vertices()], dtype=float)
        nx, ny = transform_coords(allv[:, 0], allv[:, 1], layer.crs, dst)
        nx, ny = np.atleast_1d(nx), np.atleast_1d(ny)
    out_geoms = []
    pos = 0
    it = iter(counts)
    for g in geoms:
        if g is None:
            out_geoms.append(None)
            continue
        k = next(it)
        sx, sy = nx[pos : pos + k], ny[pos : pos + k]
        out_geoms.append(g.map_vertices(lambda _x, _y, sx=sx, sy=sy: (sx, sy)))
        pos += k
    rows = tuple(Feature(r.values, g) for r, g in zip(layer.rows, out_geoms))
    return replace(layer, crs=dst, rows=rows)


def _estimate_cell_size(grid: RasterGrid, src: CrsDef, dst: CrsDef) -> float:
    x0, y0, x1, y1 = grid.bounds
    cx, cy = (x0 + x1) / 2, (y0 + y1) / 2
    cs = grid.cell_size
    tx, ty = transform_coords(np.array([cx, cx + cs, cx]), np.array([cy, cy, cy + cs]), src, dst)
    dx = math.hypot(tx[1] - tx[0], ty[1] - ty[0])
    dy = math.hypot(tx[2] - tx[0], ty[2] - ty[0])
    return (dx + dy) / 2


def transform_raster(grid: RasterGrid, target: CrsDef | int, cell_size: float | None = None) -> RasterGrid:
    """Re-grid onto ``target`` with nearest-neighbour sampling.

    Output cell centres are mapped back into the source CRS and take the
    value of the source cell they fall in, or nodata outside the source grid.
    """
    src, dst = grid.crs, get_crs(target)
    if src == dst:
        return grid
    x0, y0, x1, y1 = grid.bounds
    t = np.linspace(0.0, 1.0, 65)
    ex = np.concatenate([x0 + t * (x1 - x0), np.full_like(t, x1), x1 - t * (x1 - x0), np.full_like(t, x0)])
    ey = np.concatenate([np.full_like(t, y0), y0 + t * (y1 - y0), np.full_like(t, y1), y1 - t * (y1 - y0)])
    bx, by = transform_coords(ex, ey, src, dst)
    cs = cell_size or _estimate_cell_size(grid, src, dst)
    ox, oy = float(np.min(bx)), float(np.min(by))
    ncols = max(1, math.ceil((float(np.max(bx)) - ox) / cs))
    nrows = max(1, math.ceil((float(np.max(by)) - oy) / cs))
    cx = ox + (np.arange(ncols) + 0.5) * cs
    cy = oy + (np.arange(nrows) + 0.5) * cs
    gx, gy = np.meshgrid(cx, cy)
    sx, sy = transform_coords(gx.ravel(), gy.ravel(), dst, src)
    col = np.floor((sx - x0) / grid.cell_size).astype(np.int64)
    row = np.floor((sy - y0) / grid.cell_size).astype(np.int64)
    ok = (col >= 0) & (col < grid.ncols) & (row >= 0) & (row < grid.nrows)
    out = np.full(ncols * nrows, grid.nodata, dtype=float)
    out[ok] = grid.values[row[ok], col[ok]]
    return RasterGrid(
        origin=(ox, oy),
        cell_size=cs,
        ncols=ncols,
        nrows=nrows,
        nodata=grid.nodata,
        values=out.reshape(nrows, ncols),
        crs=dst,
        metadata=grid.metadata,
    )


def transform(obj, source: CrsDef | int | None, target: CrsDef | int):
    """Reproject a Geometry (needs ``source``), FeatureLayer or RasterGrid."""
    if isinstance(obj, Geometry):
        return transform_geometry(obj, source, target)
    if isinstance(obj, FeatureLayer):
        if source is not None and get_crs(source) != obj.crs:
            obj = replace(obj, crs=get_crs(source))
        return transform_layer(obj, target)
    if isinstance(obj, RasterGrid):
        if source is not None and get_crs(source) != obj.crs:
            obj = replace(obj, crs=get_crs(source))
        return transform_raster(obj, target)
    raise TypeError(f"cannot transform {type(obj).__name__}")
