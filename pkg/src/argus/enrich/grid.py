"""Target grid definitions and sample marshalling shared by the kernels."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable

import numpy as np

from argus.errors import DuplicateSampleLocation, GeographicCrsError, NoSamples, SchemaError
from argus.model import CrsDef, FeatureLayer, RasterGrid

DEFAULT_NODATA = -9999.0
# cells evaluated per vectorized block; bounds peak memory at ~block*n_samples floats
BLOCK = 65536


@dataclass(frozen=True)
class GridSpec:
    bbox: tuple[float, float, float, float]
    cell_size: float
    crs: CrsDef

    def __post_init__(self) -> None:
        xmin, ymin, xmax, ymax = (float(v) for v in self.bbox)
        if not (xmax > xmin and ymax > ymin):
            raise SchemaError(f"grid bbox {self.bbox} is empty")
        if not (self.cell_size > 0 and math.isfinite(self.cell_size)):
            raise SchemaError("grid cell_size must be positive")
        object.__setattr__(self, "bbox", (xmin, ymin, xmax, ymax))
        object.__setattr__(self, "cell_size", float(self.cell_size))

    @property
    def ncols(self) -> int:
        return max(1, math.ceil((self.bbox[2] - self.bbox[0]) / self.cell_size - 1e-9))

    @property
    def nrows(self) -> int:
        return max(1, math.ceil((self.bbox[3] - self.bbox[1]) / self.cell_size - 1e-9))

    @property
    def origin(self) -> tuple[float, float]:
        return self.bbox[0], self.bbox[1]

    def cell_centers(self) -> tuple[np.ndarray, np.ndarray]:
        """Flattened centers, bottom row first (matches ``RasterGrid.values.ravel()``)."""
        xs = self.bbox[0] + (np.arange(self.ncols) + 0.5) * self.cell_size
        ys = self.bbox[1] + (np.arange(self.nrows) + 0.5) * self.cell_size
        gx, gy = np.meshgrid(xs, ys)
        return gx.ravel(), gy.ravel()

    def raster(self, values: np.ndarray, nodata: float = DEFAULT_NODATA, metadata=None) -> RasterGrid:
        return RasterGrid(
            origin=self.origin,
            cell_size=self.cell_size,
            ncols=self.ncols,
            nrows=self.nrows,
            nodata=nodata,
            values=np.asarray(values, dtype=float).reshape(self.nrows, self.ncols),
            crs=self.crs,
            metadata=metadata or {},
        )

    @classmethod
    def around(cls, bounds: tuple[float, float, float, float], cell_size: float, crs: CrsDef, pad: float = 0.0) -> GridSpec:
        xmin, ymin, xmax, ymax = bounds
        return cls((xmin - pad, ymin - pad, xmax + pad, ymax + pad), cell_size, crs)


def require_projected(crs: CrsDef) -> None:
    if crs.is_geographic:
        raise GeographicCrsError(f"planar distances need a projected CRS, got EPSG:{crs.srs_id}; transform first")


def as_points(points, what: str = "samples", error=NoSamples) -> tuple[np.ndarray, np.ndarray]:
    arr = np.asarray(list(points) if not isinstance(points, np.ndarray) else points, dtype=float)
    if arr.size == 0:
        raise error(f"no {what} given")
    if arr.ndim != 2 or arr.shape[1] < 2:
        raise SchemaError(f"{what} must be (x, y[, ...]) tuples")
    return arr[:, 0], arr[:, 1]


def as_samples(samples) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    arr = np.asarray(list(samples) if not isinstance(samples, np.ndarray) else samples, dtype=float)
    if arr.size == 0:
        raise NoSamples("no samples given")
    if arr.ndim != 2 or arr.shape[1] != 3:
        raise SchemaError("samples must be (x, y, value) triples")
    if not np.all(np.isfinite(arr)):
        raise SchemaError("samples must be finite")
    return arr[:, 0], arr[:, 1], arr[:, 2]


def check_distinct(xs: np.ndarray, ys: np.ndarray) -> None:
    pairs = np.stack([xs, ys], axis=1)
    uniq, counts = np.unique(pairs, axis=0, return_counts=True)
    if (counts > 1).any():
        x, y = uniq[np.argmax(counts > 1)]
        raise DuplicateSampleLocation(f"two or more samples at ({x!r}, {y!r})")


def samples_from_layer(layer: FeatureLayer, column: str) -> list[tuple[float, float, float]]:
    """(x, y, value) per row with a non-null value and a geometry; multi-vertex
    geometries contribute their vertex mean."""
    idx = layer.column_index(column)
    out = []
    for r in layer.rows:
        v = r.values[idx]
        if v is None or r.geometry is None:
            continue
        pts = np.asarray(r.geometry.vertices(), dtype=float)
        out.append((float(pts[:, 0].mean()), float(pts[:, 1].mean()), float(v)))
    return out


def blocks(n: int, size: int = BLOCK) -> Iterable[slice]:
    for start in range(0, n, size):
        yield slice(start, min(n, start + size))
